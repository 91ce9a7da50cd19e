"""chemeval: benchmark evaluation for page-level chemical information extraction."""

__version__ = "0.1.0"

from .combined import (  # noqa: F401
    INVALID_KEY,
    CombinedCounts,
    combined_counts,
    combined_prf,
    conversion_accuracy,
)
from .detection import (  # noqa: F401
    BBox,
    ScoredBox,
    coco_ap,
    coco_ar,
    f1,
    iou,
    match_detections,
    suppress_overlaps,
)
from .graph import (  # noqa: F401
    Atom,
    Bond,
    Fingerprint,
    Molecule,
    canonical_key,
    fingerprint,
    isomorphic,
    normalize,
    tanimoto,
)
from .molfile import MolfileDocument, layout_rmsd, parse_molfile, write_molfile  # noqa: F401
from .reactions import Reaction, RxnEntity, hard_match, reaction_prf, soft_match  # noqa: F401
from .smiles import parse_smiles, write_smiles  # noqa: F401
