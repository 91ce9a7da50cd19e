"""MOLfile V2000 reader/writer and the layout-fidelity metric.

Writer columns are fixed: coordinates %10.4f, element right-aligned in 3
characters, aromatic bonds emitted as type 4, wavy stereo as bond-stereo 4,
charges via "M  CHG", hydrogen counts in the atom-line hhh field (stored as
n+1, 0 = unmarked) so aromatic tautomers like pyrrole survive a round trip.
The parser is strict on structure (counts, coordinate field widths, M  END)
but lenient on trailing whitespace and the legacy atom-line charge column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .elements import ELEMENT_SYMBOLS
from .errors import (
    LayoutError,
    MolfileParseError,
    StructureMismatchError,
    UnsupportedMolfileVersion,
)
from .graph import (
    Atom,
    Bond,
    Molecule,
    canonical_key_and_order,
)

_BOND_TYPE_TO_ORDER = {1: "single", 2: "double", 3: "triple", 4: "aromatic"}
_ORDER_TO_BOND_TYPE = {v: k for k, v in _BOND_TYPE_TO_ORDER.items()}
_STEREO_CODE_TO_MARK = {0: "none", 1: "wedge", 4: "wavy", 6: "hash"}
_MARK_TO_STEREO_CODE = {v: k for k, v in _STEREO_CODE_TO_MARK.items()}
_LEGACY_CHARGE = {0: 0, 1: 3, 2: 2, 3: 1, 4: 0, 5: -1, 6: -2, 7: -3}


@dataclass(frozen=True)
class MolfileDocument:
    header: tuple[str, str, str]
    counts: tuple[int, int]
    molecule: Molecule
    properties: tuple[str, ...]

    def __post_init__(self):
        if self.counts != (len(self.molecule.atoms), len(self.molecule.bonds)):
            raise ValueError("counts do not match molecule size")
        for i, atom in enumerate(self.molecule.atoms):
            if atom.coords is None:
                raise ValueError(f"atom {i} has no coordinates")


def _int_field(line: str, start: int, end: int, lineno: int, what: str) -> int:
    token = line[start:end].strip()
    if not token:
        return 0
    try:
        return int(token)
    except ValueError:
        raise MolfileParseError(f"bad {what} field {token!r}", lineno) from None


def _float_field(line: str, start: int, end: int, lineno: int, what: str) -> float:
    token = line[start:end].strip()
    try:
        return float(token)
    except ValueError:
        raise MolfileParseError(f"bad {what} field {token!r}", lineno) from None


def parse_molfile(text: str) -> MolfileDocument:
    """Parse a V2000 connection table."""
    lines = text.replace("\r\n", "\n").split("\n")
    if len(lines) < 4:
        raise MolfileParseError("file too short for a V2000 header", len(lines))
    header = (lines[0], lines[1], lines[2])
    counts_line = lines[3]
    version = counts_line[33:39].strip() or counts_line.rstrip()[-5:]
    if version == "V3000":
        raise UnsupportedMolfileVersion("V3000 connection tables are not supported", 4)
    if version != "V2000":
        raise MolfileParseError(f"counts line does not end in V2000: {counts_line!r}", 4)
    n_atoms = _int_field(counts_line, 0, 3, 4, "atom count")
    n_bonds = _int_field(counts_line, 3, 6, 4, "bond count")
    if n_atoms < 1:
        raise MolfileParseError("atom count must be at least 1", 4)
    if len(lines) < 4 + n_atoms + n_bonds:
        raise MolfileParseError(
            f"counts claim {n_atoms} atoms and {n_bonds} bonds but the file is shorter",
            4,
        )

    atoms: list[Atom] = []
    for k in range(n_atoms):
        lineno = 5 + k
        line = lines[4 + k]
        if len(line.rstrip()) < 34:
            raise MolfileParseError("atom line too short", lineno)
        x = _float_field(line, 0, 10, lineno, "x coordinate")
        y = _float_field(line, 10, 20, lineno, "y coordinate")
        z = _float_field(line, 20, 30, lineno, "z coordinate")
        element = line[31:34].strip()
        if element != "*" and element not in ELEMENT_SYMBOLS:
            raise MolfileParseError(f"unknown element {element!r}", lineno)
        legacy_code = _int_field(line, 36, 39, lineno, "charge")
        charge = _LEGACY_CHARGE.get(legacy_code, 0)
        # hydrogen-count field stores n+1; 0 means "not marked"
        h_field = _int_field(line, 42, 45, lineno, "hydrogen count")
        explicit_h = h_field - 1 if h_field > 0 else None
        atoms.append(
            Atom(element=element, charge=charge, explicit_h=explicit_h, coords=(x, y, z))
        )

    bonds: list[Bond] = []
    for k in range(n_bonds):
        lineno = 5 + n_atoms + k
        line = lines[4 + n_atoms + k]
        if len(line.rstrip()) < 9:
            raise MolfileParseError("bond line too short", lineno)
        a = _int_field(line, 0, 3, lineno, "first atom")
        b = _int_field(line, 3, 6, lineno, "second atom")
        bond_type = _int_field(line, 6, 9, lineno, "bond type")
        stereo_code = _int_field(line, 9, 12, lineno, "bond stereo")
        order = _BOND_TYPE_TO_ORDER.get(bond_type)
        if order is None:
            raise MolfileParseError(f"unknown bond type {bond_type}", lineno)
        if not (1 <= a <= n_atoms and 1 <= b <= n_atoms):
            raise MolfileParseError(f"bond references atom out of range", lineno)
        mark = _STEREO_CODE_TO_MARK.get(stereo_code, "none")
        bonds.append(Bond(a - 1, b - 1, order=order, stereo_mark=mark))

    properties: list[str] = []
    saw_end = False
    chg_overrides: dict[int, int] = {}
    saw_chg = False
    for k in range(4 + n_atoms + n_bonds, len(lines)):
        line = lines[k]
        properties.append(line)
        if line.startswith("M  END"):
            saw_end = True
            break
        if line.startswith("M  CHG"):
            saw_chg = True
            fields = line.split()
            count = int(fields[2])
            values = fields[3 : 3 + 2 * count]
            for idx_tok, chg_tok in zip(values[0::2], values[1::2]):
                chg_overrides[int(idx_tok) - 1] = int(chg_tok)
    if not saw_end:
        raise MolfileParseError("missing 'M  END'", len(lines))
    if saw_chg:
        # per V2000 semantics a charge property block supersedes the legacy column
        atoms = [
            replace(a, charge=chg_overrides.get(i, 0)) for i, a in enumerate(atoms)
        ]

    # atoms joined by type-4 bonds carry the aromatic flag
    aromatic_atoms = set()
    for bond in bonds:
        if bond.order == "aromatic":
            aromatic_atoms.add(bond.a)
            aromatic_atoms.add(bond.b)
    if aromatic_atoms:
        atoms = [
            replace(a, aromatic=True) if i in aromatic_atoms else a
            for i, a in enumerate(atoms)
        ]

    molecule = Molecule(tuple(atoms), tuple(bonds))
    return MolfileDocument(
        header=header,
        counts=(n_atoms, n_bonds),
        molecule=molecule,
        properties=tuple(properties),
    )


def write_molfile(
    mol: Molecule,
    layout: list[tuple[float, float]] | None = None,
    name: str = "",
) -> str:
    """Serialize to V2000 text; reparsing reproduces atoms, bonds, coordinates."""
    coords: list[tuple[float, float, float]] = []
    if layout is not None:
        if len(layout) != len(mol.atoms):
            raise LayoutError(
                f"layout covers {len(layout)} atoms, molecule has {len(mol.atoms)}"
            )
        coords = [(float(x), float(y), 0.0) for x, y in layout]
    else:
        for i, atom in enumerate(mol.atoms):
            if atom.coords is None:
                raise LayoutError(f"atom {i} has no coordinates and no layout given")
            coords.append(atom.coords)

    lines = [name, "chemeval", ""]
    lines.append(
        f"{len(mol.atoms):3d}{len(mol.bonds):3d}  0  0  0  0  0  0  0  0999 V2000"
    )
    for atom, (x, y, z) in zip(mol.atoms, coords):
        h_field = 0 if atom.explicit_h is None else atom.explicit_h + 1
        lines.append(
            f"{x:10.4f}{y:10.4f}{z:10.4f} {atom.element:>3} 0  0  0{h_field:3d}  0  0  0  0  0  0  0  0"
        )
    for bond in mol.bonds:
        bond_type = _ORDER_TO_BOND_TYPE[bond.order]
        stereo = _MARK_TO_STEREO_CODE[bond.stereo_mark]
        lines.append(f"{bond.a + 1:3d}{bond.b + 1:3d}{bond_type:3d}{stereo:3d}  0  0  0")
    charged = [(i + 1, a.charge) for i, a in enumerate(mol.atoms) if a.charge != 0]
    for start in range(0, len(charged), 8):
        chunk = charged[start : start + 8]
        entry = "".join(f"{idx:4d}{chg:4d}" for idx, chg in chunk)
        lines.append(f"M  CHG{len(chunk):3d}{entry}")
    lines.append("M  END")
    return "\n".join(lines) + "\n"


def layout_rmsd(a: Molecule | MolfileDocument, b: Molecule | MolfileDocument) -> float:
    """RMS coordinate deviation after optimal 2D similarity alignment.

    Atoms are paired by canonical rank; translation, rotation, and uniform
    scale of b are removed by closed-form complex Procrustes.
    """
    mol_a = a.molecule if isinstance(a, MolfileDocument) else a
    mol_b = b.molecule if isinstance(b, MolfileDocument) else b
    key_a, order_a = canonical_key_and_order(mol_a)
    key_b, order_b = canonical_key_and_order(mol_b)
    if key_a != key_b:
        raise StructureMismatchError(
            f"canonical keys differ: {key_a!r} vs {key_b!r}"
        )
    for mol, label in ((mol_a, "first"), (mol_b, "second")):
        if any(atom.coords is None for atom in mol.atoms):
            raise LayoutError(f"{label} molecule has atoms without coordinates")
    pa = [complex(mol_a.atoms[i].coords[0], mol_a.atoms[i].coords[1]) for i in order_a]
    pb = [complex(mol_b.atoms[i].coords[0], mol_b.atoms[i].coords[1]) for i in order_b]
    n = len(pa)
    ca = sum(pa) / n
    cb = sum(pb) / n
    pa = [p - ca for p in pa]
    pb = [p - cb for p in pb]
    denom = sum(abs(q) ** 2 for q in pb)
    if denom == 0.0:
        transform = 0j
    else:
        transform = sum(q.conjugate() * p for p, q in zip(pa, pb)) / denom
    residual = sum(abs(p - transform * q) ** 2 for p, q in zip(pa, pb))
    return math.sqrt(max(residual, 0.0) / n)
