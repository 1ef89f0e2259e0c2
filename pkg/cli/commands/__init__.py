"""Subcommands of the treeloss CLI."""

from .base import Command
from .data import gen_data_command, gen_tree_command
from .evaluate import eval_command, ood_sweep_command
from .experiment import experiment_command
from .train import train_command
from .tree_metric import dump_distance_command, wasserstein_command

COMMANDS: tuple[Command, ...] = (
    gen_tree_command,
    gen_data_command,
    train_command,
    eval_command,
    ood_sweep_command,
    dump_distance_command,
    wasserstein_command,
    experiment_command,
)

__all__ = ["COMMANDS", "Command"]
