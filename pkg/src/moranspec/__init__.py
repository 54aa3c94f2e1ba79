"""Sierpinski-type Moran measures: exact zero structure, candidate spectra,
orthogonality and completeness verification, spectrality decisions, and
attractor rendering."""

__version__ = "0.1.0"

from .analyzer import (
    TruncatedTransform,
    VerificationReport,
    completeness_scan,
    find_zero_level,
    finite_level_identity,
    transform_batch,
    truncated_transform,
    verify_orthogonality,
)
from .builder import (
    Block,
    BlockDecomposition,
    BlockSizeInfo,
    SpectrumLevel,
    TransformRecord,
    block_size_parameters,
    build_blocks,
    build_spectrum_level,
    choose_block_size,
    find_admissible_direction,
    normalize_first_level,
    spectrum_levels,
)
from .decider import (
    AdmissibilityResult,
    PlanarClass,
    Verdict,
    admissibility_scan,
    classify_planar_digit_set,
    decide,
    decide_diagonal,
    decide_single_direction,
    decide_triangular,
    has_infinite_orthogonal_set,
    resample_admissibility,
)
from .exact import (
    IntMatrix,
    RationalMatrix,
    check_contraction,
    cyclotomic_polynomial,
    cyclotomic_vanishes,
    operator_norm_upper,
    rational_inverse,
)
from .masks import (
    DigitSet,
    ZeroStructure,
    find_zero_directions,
    mask_eval,
    residue_vanishing_test,
    verify_zero_exactness,
)
from .pairs import (
    CompatiblePair,
    is_compatible_pair,
    reduce_pair_mod,
    tower_pair,
    translate_pair,
    verify_pair,
)
from .render import PointCloud, parse_csv, read_ppm, render, support_points
from .specfile import load_document, load_system
from .system import Level, MoranSystem, build_system
