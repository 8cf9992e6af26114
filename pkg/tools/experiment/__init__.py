# tools/experiment/__init__.py
"""
Experiment CLI: constants tables, ensembles, goodness of fit, oracles, scans.

Usage:
    python -m tools.experiment constants --tol 1e-3 --out constants.json
    python -m tools.experiment simulate --in manifest.yaml
    python -m tools.experiment simulate --stat MAIN_DISCRETE --n 4096 --reps 2000 --seed 7 --out s.csv
    python -m tools.experiment gof --in s.csv
    python -m tools.experiment oracle p_inf --a 2 --reps 100000
    python -m tools.experiment scan --in increments.csv --stat MAIN_DISCRETE
    python -m tools.experiment rates --n 1e3 1e6 --c 1
"""

from .base import BaseCommand, ToolkitConfig, load_config
from .cmd_constants import ConstantsCommand
from .cmd_gof import GofCommand
from .cmd_oracle import OracleCommand
from .cmd_rates import RatesCommand
from .cmd_scan import ScanCommand
from .cmd_simulate import SimulateCommand

# Registry: subcommand name -> command class
COMMANDS = {
    cls.name: cls
    for cls in (ConstantsCommand, SimulateCommand, GofCommand, OracleCommand, ScanCommand, RatesCommand)
}


def get_command(name: str, config_path: str = None, profile: str = None) -> BaseCommand:
    """Factory: load config with profile overlay, return the command instance."""
    config = load_config(config_path, profile=profile)
    return COMMANDS[name](config)
