"""Road-aware two-scale localization from HetNet RSRP sequences."""

from .config import Config
from .features import FEATURE_KINDS, Q, feature_names, feature_set, gradients
from .localizer import LocalizationResult, SignalStream, extract_window, localize, localize_window
from .radiomap import RadioMap, build_radio_map, load_map, save_map
from .segmentation import bottom_up_segment, build_subsegments, segment_cost
from .signal_model import FLOOR_DBM, DatasetError, Position2D, Scenario, SignalSequence, parse_dataset

__version__ = "0.1.0"

__all__ = [
    "FEATURE_KINDS",
    "FLOOR_DBM",
    "Q",
    "Config",
    "DatasetError",
    "LocalizationResult",
    "Position2D",
    "RadioMap",
    "Scenario",
    "SignalSequence",
    "SignalStream",
    "bottom_up_segment",
    "build_radio_map",
    "build_subsegments",
    "extract_window",
    "feature_names",
    "feature_set",
    "gradients",
    "load_map",
    "localize",
    "localize_window",
    "parse_dataset",
    "save_map",
    "segment_cost",
]
