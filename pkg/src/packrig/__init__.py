"""Circle packings on closed surfaces, their deformation space and rigidity checks."""
from importlib.resources import files

__version__ = "0.1.0"


def data_path(name: str):
    """Path of a shipped fixture in packrig/data."""
    return files("packrig") / "data" / name
