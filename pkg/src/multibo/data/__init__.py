"""Bundled data files."""

from importlib import resources


def sample_surface_path() -> str:
    """Path of the bundled sample tabulated surface.

    The file mimics an offline hyperparameter-accuracy table over a network
    width axis (5 to 35) and a depth projection axis (0 to 50, six layer
    candidates spaced by 10). Its values are synthetic placeholders shaped
    to be multimodal around a high-80s accuracy plateau; they come from a
    formula, not from training any model.
    """
    return str(resources.files(__package__) / "sample_accuracy_surface.csv")
