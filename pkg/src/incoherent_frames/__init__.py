"""Low-coherence frame design, harmonic row selection and sparse-recovery benchmarks."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .frame import (FrameError, GramSummary, coherence, fp_upper_bound, frame_potential,
                    mutual_coherence, normalize_columns, papr, polar_retraction, unit_modulus,
                    welch_bound)
from .harmonic import (CoherenceOperator, HarmonicConfig, SelectionPattern, complement,
                       equivalence_maps, extract_and_reduce, irl1_relax, local_search,
                       select_rows, selection_coherence)
from .sidco import (DesignReport, SidcoConfig, VariantSpec, initialize, make_fixed_support, run,
                    trust_radius, update_column)

__all__ = [
    "FrameError", "GramSummary", "coherence", "fp_upper_bound", "frame_potential",
    "mutual_coherence", "normalize_columns", "papr", "polar_retraction", "unit_modulus",
    "welch_bound", "CoherenceOperator", "HarmonicConfig", "SelectionPattern", "complement",
    "equivalence_maps", "extract_and_reduce", "irl1_relax", "local_search", "select_rows",
    "selection_coherence", "DesignReport", "SidcoConfig", "VariantSpec", "initialize",
    "make_fixed_support", "run", "trust_radius", "update_column",
]
