"""Area reduction by relocating 2-to-1 multiplexers toward their data inputs."""
from .cells import AreaTable, CELL_TYPES, get_cell
from .netlist import Netlist, NetlistError, validate, simulate, area
from .gnl import parse, read, write, save, stats

__version__ = "0.1.0"

__all__ = [
    "AreaTable", "CELL_TYPES", "get_cell", "Netlist", "NetlistError",
    "validate", "simulate", "area", "parse", "read", "write", "save", "stats",
]
