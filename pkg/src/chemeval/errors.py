"""Exception hierarchy for chemeval."""


class ChemevalError(Exception):
    """Base class for all chemeval errors."""


class ValenceError(ChemevalError):
    """An atom's bonded valence exceeds every allowed valence for its element."""

    def __init__(self, atom_index: int, message: str):
        super().__init__(f"atom {atom_index}: {message}")
        self.atom_index = atom_index


class SmilesParseError(ChemevalError):
    """Malformed SMILES input; carries the character offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"offset {offset}: {message}")
        self.offset = offset


class MolfileParseError(ChemevalError):
    """Malformed MOLfile input; carries the 1-based line number of the fault."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnsupportedMolfileVersion(MolfileParseError):
    """Connection table is not V2000 (e.g. V3000)."""


class LayoutError(ChemevalError):
    """Missing or unusable atom coordinates."""


class StructureMismatchError(ChemevalError):
    """Two documents must share a canonical key but do not."""


class OracleCapacityError(ChemevalError):
    """Exact search exceeds its size cap."""


class UndefinedMetricError(ChemevalError):
    """The requested metric has an empty denominator (e.g. zero ground truth)."""


class CorpusError(ChemevalError):
    """Schema or consistency violation in an annotation/prediction file."""


class FixtureError(ChemevalError):
    """Infeasible fixture-generation parameters."""
