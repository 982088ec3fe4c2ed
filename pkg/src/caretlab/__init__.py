"""caretlab: desk-scale computation in the free binary system.

Trees and their enumeration, exact-rational measures and convolution,
finite magmas with idempotent-measure solvers, Thompson tree pairs, spine
constructions, and exact LP search for near-constant copies.
"""

__version__ = "0.1.0"

from .trees import (
    LEAF,
    Tree,
    caret,
    canonical_index,
    dyadic_repr,
    enumerate_trees,
    format_tree,
    left_comb,
    parse_tree,
    prune,
    right_comb,
    substitute,
    subterm,
    tree_stats,
)
from .measures import (
    CARET_SYSTEM,
    BinarySystem,
    Measure,
    convolve,
    evaluate,
    family_seminorm,
    make_measure,
    pushforward,
    substitute_measures,
    tensor,
)
from .magmas import (
    Magma,
    evaluation_hom,
    find_idempotent,
    hindman_pairs,
    magma_system,
    parse_magma,
    quotient_system,
    reachable_sets,
    verify_idempotent,
)
from .thompson import (
    FElement,
    compose,
    from_tree_pair,
    generator,
    identity_element,
    invariance_defect,
    invert,
    partial_apply,
)
from .constructions import (
    SIZE_ORDER,
    QuasiOrder,
    address_profile,
    dyadically_below,
    in_spine_span,
    matches_odometer_prefix,
    monotonicity_profile,
    odometer_bits,
    spine_collapse,
    spine_collapse_measure,
    spine_tree,
)
from .ramsey import (
    Coloring,
    Embedding,
    EmbeddingCopy,
    adversarial_coloring_search,
    constant_copy_exists,
    copy_values,
    enumerate_embeddings,
    min_oscillation_copy,
    scan_minimal_n,
    strong_copy_search,
)
