"""
Configuration Generator for Dirac transition scenarios

This script writes scenario files for the studies that accompany the
reference run: the grid-refinement ladder, snapshot-cadence variants,
the small Crank-Nicolson oracle instance, and the sigma_0 mass-term
variant.

Usage:
    python config_generator.py --output_dir configs/generated
"""

import argparse
import copy
import logging
import os
from typing import Any, Dict, List

from scenario_config import DEFAULT_CONFIG, load_run_config, write_config

# pylint: disable=line-too-long

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s',
    handlers=[logging.StreamHandler()]
)
logger = logging.getLogger(__name__)

# Base configuration: the reference defaults
BASE_CONFIG: Dict[str, Dict[str, str]] = DEFAULT_CONFIG

# Named scenarios
SCENARIOS: List[Dict[str, Any]] = [
    {
        "name": "reference_default",
        "description": "sigma = 2 gaussian, weights (1,1), t in [0, 40], n = 4096 on [-80, 80)",
        "parameters": {},
    },
    {
        "name": "oracle_small",
        "description": "Crank-Nicolson oracle instance: n = 512 on [-25.6, 25.6), t_f = 2",
        "parameters": {
            "grid": {"x_min": "-25.6", "x_max": "25.6", "n": "512"},
            "scenario": {"t_f": "2.0", "n_steps": "20"},
        },
    },
    {
        "name": "sigma0_mass_term",
        "description": "Literal sigma_0 mass term (no zitterbewegung expected)",
        "parameters": {"physics": {"mass_term": "sigma_0"}},
    },
    {
        "name": "raw_projections",
        "description": "RSI amplitude from unnormalized energy projections",
        "parameters": {"scenario": {"rsi_normalization": "raw"}},
    },
]

# Parameter variations
PARAMETER_VARIATIONS: Dict[str, Dict[str, List[str]]] = {
    "grid_refinement": {"n": ["2048", "4096", "8192"]},
    "cadence": {"n_steps": ["400", "800", "1600", "4000"]},
}


def merge_config(base: Dict[str, Dict[str, str]], parameters: Dict[str, Dict[str, str]]) -> Dict[str, Dict[str, str]]:
    """Section-wise copy of `base` updated with `parameters`."""
    config = copy.deepcopy(base)
    for section, values in parameters.items():
        config.setdefault(section, {}).update(values)
    return config


def _write(config: Dict[str, Dict[str, str]], filename: str, description: str) -> str:
    write_config(config, filename, header=description)
    # parse back so a bad variant fails here rather than at run time
    load_run_config(filename)
    logger.info("Generated scenario config: %s", filename)
    return filename


def generate_scenario_configs(output_dir: str) -> List[str]:
    """Generate scenario files for the named scenarios.

    Args:
        output_dir: Directory to write configuration files

    Returns:
        Paths written
    """
    os.makedirs(output_dir, exist_ok=True)
    return [
        _write(merge_config(BASE_CONFIG, scenario["parameters"]),
               os.path.join(output_dir, f"{scenario['name']}.ini"),
               scenario["description"])
        for scenario in SCENARIOS
    ]


def generate_refinement_configs(output_dir: str) -> List[str]:
    """Generate the grid-refinement ladder (domain fixed, n doubled).

    Args:
        output_dir: Directory to write configuration files

    Returns:
        Paths written
    """
    os.makedirs(output_dir, exist_ok=True)
    paths = []
    for n in PARAMETER_VARIATIONS["grid_refinement"]["n"]:
        config = merge_config(BASE_CONFIG, {"grid": {"n": n}})
        paths.append(_write(config, os.path.join(output_dir, f"grid_n{n}.ini"), f"Grid refinement: n = {n}"))
    return paths


def generate_cadence_configs(output_dir: str) -> List[str]:
    """Generate snapshot-cadence variants over the reference interval.

    Args:
        output_dir: Directory to write configuration files

    Returns:
        Paths written
    """
    os.makedirs(output_dir, exist_ok=True)
    paths = []
    for n_steps in PARAMETER_VARIATIONS["cadence"]["n_steps"]:
        config = merge_config(BASE_CONFIG, {"scenario": {"n_steps": n_steps}})
        # keep long-form density output near the default 1.0 time-unit spacing
        config["output"]["density_stride"] = str(max(1, int(n_steps) // 40))
        paths.append(_write(config, os.path.join(output_dir, f"cadence_{n_steps}.ini"), f"Snapshot cadence: {n_steps} steps"))
    return paths


def parse_arguments():
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description='Generate scenario files for the Dirac transition simulator'
    )
    parser.add_argument(
        '--output_dir',
        default='configs/generated',
        help='Directory to write configuration files'
    )
    parser.add_argument(
        '--scenarios_only',
        action='store_true',
        help='Generate only the named scenarios'
    )
    parser.add_argument(
        '--refinement_only',
        action='store_true',
        help='Generate only the grid-refinement ladder'
    )
    parser.add_argument(
        '--cadence_only',
        action='store_true',
        help='Generate only the cadence variants'
    )
    return parser.parse_args()


def main():
    """Main execution function."""
    args = parse_arguments()

    logger.info("Generating scenario files...")
    os.makedirs(args.output_dir, exist_ok=True)

    if args.scenarios_only:
        generate_scenario_configs(os.path.join(args.output_dir, 'scenarios'))
    elif args.refinement_only:
        generate_refinement_configs(os.path.join(args.output_dir, 'refinement'))
    elif args.cadence_only:
        generate_cadence_configs(os.path.join(args.output_dir, 'cadence'))
    else:
        generate_scenario_configs(os.path.join(args.output_dir, 'scenarios'))
        generate_refinement_configs(os.path.join(args.output_dir, 'refinement'))
        generate_cadence_configs(os.path.join(args.output_dir, 'cadence'))

    logger.info("Configuration generation complete!")


if __name__ == "__main__":
    main()
