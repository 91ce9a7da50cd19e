"""Seeded synthetic corpora with generator-tracked expected metric values.

Pages are laid out on a fixed 10x10 grid of 220px cells; every ground-truth
molecule, spurious prediction, and condition text box gets its own cell, so
boxes from different items can never overlap and the generator's TP/FP/FN
bookkeeping is exact. Predicted boxes are jittered copies of their GT box,
clamped to the cell, and the generator records whether the jitter pushed IoU
below the matching threshold.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from pathlib import Path

from .combined import CombinedCounts
from .detection import BBox, iou
from .errors import FixtureError
from .graph import (
    Atom,
    Bond,
    Molecule,
    canonical_key,
    fingerprint,
    normalize,
    tanimoto,
)
from .molfile import write_molfile

GRID_COLS = 10
GRID_ROWS = 10
CELL = 220.0
BOX_OFFSET = 30.0
BOX_SIZE = 160.0
PAGE_WIDTH = GRID_COLS * CELL
PAGE_HEIGHT = GRID_ROWS * CELL
MATCH_TAU = 0.5

_ELEMENT_POOL = ["C"] * 8 + ["N", "N", "O", "O", "S", "F", "Cl"]
_BUDGETS = {"C": 4, "N": 3, "O": 2, "S": 2, "F": 1, "Cl": 1, "Br": 1}


@dataclass(frozen=True)
class FixtureParams:
    pages: int
    molecules_per_page: tuple[int, int] = (2, 6)
    reactions_per_page: tuple[int, int] = (0, 2)
    box_jitter: float = 0.0
    structure_corruption_rate: float = 0.0
    drop_rate: float = 0.0
    spurious_rate: float = 0.0
    dataset: str = "fixture"

    def __post_init__(self):
        if self.pages < 0:
            raise FixtureError("pages must be >= 0")
        for lo, hi, what in (
            (*self.molecules_per_page, "molecules_per_page"),
            (*self.reactions_per_page, "reactions_per_page"),
        ):
            if lo < 0 or hi < lo:
                raise FixtureError(f"invalid {what} range ({lo}, {hi})")
        for rate, what in (
            (self.structure_corruption_rate, "structure_corruption_rate"),
            (self.drop_rate, "drop_rate"),
            (self.spurious_rate, "spurious_rate"),
        ):
            if not (0.0 <= rate <= 1.0):
                raise FixtureError(f"{what} must be in [0, 1]: {rate}")
        if self.box_jitter < 0:
            raise FixtureError(f"box_jitter must be >= 0: {self.box_jitter}")


def random_molecule(rng: random.Random, min_atoms: int = 3, max_atoms: int = 20) -> Molecule:
    """Valence-legal random molecular graph with 2D coordinates."""
    n = rng.randint(min_atoms, max_atoms)
    elements = [rng.choice(_ELEMENT_POOL) for _ in range(n)]
    elements[0] = "C"  # guarantee a growable root
    budgets = [_BUDGETS[e] for e in elements]
    bonds: list[Bond] = []
    pairs: set[tuple[int, int]] = set()
    for i in range(1, n):
        parents = [j for j in range(i) if budgets[j] >= 1]
        if not parents:
            # every placed atom is saturated; stop growing
            n = i
            elements = elements[:n]
            budgets = budgets[:n]
            break
        parent = rng.choice(parents)
        if budgets[parent] >= 2 and budgets[i] >= 2 and rng.random() < 0.15:
            order = "double"
            cost = 2
        else:
            order = "single"
            cost = 1
        bonds.append(Bond(parent, i, order=order))
        pairs.add((parent, i))
        budgets[parent] -= cost
        budgets[i] -= cost
    for _ in range(rng.randint(0, 2)):
        spare = [j for j in range(n) if budgets[j] >= 1]
        if len(spare) < 2:
            break
        a, b = rng.sample(spare, 2)
        pair = (a, b) if a < b else (b, a)
        if pair in pairs:
            continue
        pairs.add(pair)
        bonds.append(Bond(pair[0], pair[1], order="single"))
        budgets[a] -= 1
        budgets[b] -= 1
    atoms = tuple(
        Atom(
            element=elements[i],
            coords=(round(rng.uniform(0.0, 10.0), 2), round(rng.uniform(0.0, 10.0), 2), 0.0),
        )
        for i in range(n)
    )
    return Molecule(atoms, tuple(bonds))


def _strip_hydrogens(mol: Molecule) -> Molecule:
    """Drop explicit H counts so normalization re-infers them after edits."""
    return Molecule(
        tuple(replace(atom, explicit_h=None) for atom in mol.atoms), mol.bonds
    )


def mutate_molecule(rng: random.Random, mol: Molecule) -> Molecule:
    """Return a valence-legal molecule with a different canonical key."""
    original = canonical_key(normalize(mol))
    mol = _strip_hydrogens(mol)
    for _ in range(20):
        candidate = _mutate_once(rng, mol)
        if candidate is None:
            continue
        if canonical_key(normalize(candidate)) != original:
            return candidate
    # fallback: append a two-carbon tail to the first atom with spare valence
    candidate = _append_atom(mol, "C")
    candidate = _append_atom(candidate, "C")
    return candidate


def _bond_sum(mol: Molecule, i: int) -> int:
    total = 0
    for bond in mol.bonds:
        if i in (bond.a, bond.b):
            total += {"single": 1, "double": 2, "triple": 3, "aromatic": 2}[bond.order]
    return total


def _append_atom(mol: Molecule, element: str) -> Molecule:
    for i, atom in enumerate(mol.atoms):
        budget = _BUDGETS.get(atom.element, 0) - _bond_sum(mol, i)
        if budget >= 1:
            xs = max(a.coords[0] for a in mol.atoms if a.coords) + 1.0
            new_atom = Atom(element=element, coords=(xs, 0.0, 0.0))
            return Molecule(
                mol.atoms + (new_atom,),
                mol.bonds + (Bond(i, len(mol.atoms), order="single"),),
            )
    # every atom saturated: swap the last halogen-free terminal to nitrogen
    atoms = list(mol.atoms)
    for i in range(len(atoms) - 1, -1, -1):
        if atoms[i].element == "C" and _bond_sum(mol, i) <= 3:
            atoms[i] = Atom(element="N", coords=atoms[i].coords)
            return Molecule(tuple(atoms), mol.bonds)
    atoms[0] = Atom(element="Si", coords=atoms[0].coords)
    return Molecule(tuple(atoms), mol.bonds)


def _mutate_once(rng: random.Random, mol: Molecule) -> Molecule | None:
    if rng.random() < 0.5:
        return _append_atom(mol, rng.choice(["C", "N", "O"]))
    # element swap respecting the current bond sum
    order = list(range(len(mol.atoms)))
    rng.shuffle(order)
    for i in order:
        current = mol.atoms[i].element
        used = _bond_sum(mol, i)
        options = [e for e, v in _BUDGETS.items() if e != current and v >= used]
        if not options:
            continue
        atoms = list(mol.atoms)
        atoms[i] = Atom(element=rng.choice(options), coords=atoms[i].coords)
        return Molecule(tuple(atoms), mol.bonds)
    return None


def _cell_origin(slot: int) -> tuple[float, float]:
    col = slot % GRID_COLS
    row = slot // GRID_COLS
    return col * CELL, row * CELL


def _slot_box(slot: int) -> list[float]:
    cx, cy = _cell_origin(slot)
    return [cx + BOX_OFFSET, cy + BOX_OFFSET, cx + BOX_OFFSET + BOX_SIZE, cy + BOX_OFFSET + BOX_SIZE]


def _jittered_box(rng: random.Random, slot: int, jitter: float) -> list[float]:
    cx, cy = _cell_origin(slot)
    base = _slot_box(slot)
    max_shift = BOX_OFFSET  # keeps the box inside its own cell
    dx = max(-max_shift, min(max_shift, rng.uniform(-jitter, jitter)))
    dy = max(-max_shift, min(max_shift, rng.uniform(-jitter, jitter)))
    return [round(v, 2) for v in (base[0] + dx, base[1] + dy, base[2] + dx, base[3] + dy)]


def build_fixture(seed: int, params: FixtureParams) -> tuple[dict, dict, dict]:
    """Build (ground truth, predictions, expected) JSON-ready objects."""
    rng = random.Random(seed)
    gt_pages = []
    pred_pages = []
    total = CombinedCounts(0, 0, 0)
    conversion_pairs = 0
    conversion_matches = 0
    conversion_tanimoto = 0.0

    for page_index in range(params.pages):
        page_id = f"page-{page_index:04d}"
        n_mol = rng.randint(*params.molecules_per_page)
        mols = [normalize(random_molecule(rng)) for _ in range(n_mol)]
        dropped = [rng.random() < params.drop_rate for _ in range(n_mol)]
        corrupted = [rng.random() < params.structure_corruption_rate for _ in range(n_mol)]
        spurious = [rng.random() < params.spurious_rate for _ in range(n_mol)]
        n_rxn = rng.randint(*params.reactions_per_page) if n_mol >= 2 else 0

        n_spurious = sum(spurious)
        slots_needed = n_mol + n_spurious + n_rxn
        if slots_needed > GRID_COLS * GRID_ROWS:
            raise FixtureError(
                f"page {page_id}: {slots_needed} boxes exceed the "
                f"{GRID_COLS * GRID_ROWS}-cell page layout"
            )

        gt_molecules = []
        pred_molecules = []
        page_tp = 0
        for m in range(n_mol):
            mol_id = f"{page_id}-m{m}"
            gt_box = _slot_box(m)
            gt_molecules.append(
                {"id": mol_id, "bbox": gt_box, "molfile": write_molfile(mols[m])}
            )
            conversion_pairs += 1
            if dropped[m]:
                continue
            if corrupted[m]:
                structure_mol = normalize(mutate_molecule(rng, mols[m]))
            else:
                structure_mol = mols[m]
            conversion_tanimoto += tanimoto(
                fingerprint(mols[m]), fingerprint(structure_mol)
            )
            if not corrupted[m]:
                conversion_matches += 1
            pred_box = _jittered_box(rng, m, params.box_jitter)
            overlap = iou(BBox(*gt_box), BBox(*pred_box))
            if not corrupted[m] and overlap >= MATCH_TAU:
                page_tp += 1
            if rng.random() < 0.5:
                structure = {"format": "smiles", "value": canonical_key(structure_mol)}
            else:
                structure = {"format": "molfile", "value": write_molfile(structure_mol)}
            pred_molecules.append(
                {
                    "id": mol_id,
                    "bbox": pred_box,
                    "score": round(rng.uniform(0.5, 1.0), 3),
                    "structure": structure,
                }
            )
        next_slot = n_mol
        for m in range(n_mol):
            if not spurious[m]:
                continue
            extra = normalize(random_molecule(rng))
            pred_molecules.append(
                {
                    "bbox": _slot_box(next_slot),
                    "score": round(rng.uniform(0.1, 0.9), 3),
                    "structure": {"format": "smiles", "value": canonical_key(extra)},
                }
            )
            next_slot += 1

        gt_reactions = []
        pred_reactions = []
        for r in range(n_rxn):
            k = min(n_mol, rng.randint(2, 3))
            chosen = rng.sample(range(n_mol), k)
            reactant_ids = chosen[:-1]
            product_id = chosen[-1]
            text_slot = next_slot
            next_slot += 1
            tx, ty = _cell_origin(text_slot)
            text_box = [tx + 40.0, ty + 90.0, tx + 180.0, ty + 130.0]
            gt_reactions.append(
                {
                    "reactants": [{"ref": f"{page_id}-m{i}"} for i in reactant_ids],
                    "conditions": [{"kind": "text", "bbox": text_box}],
                    "products": [{"ref": f"{page_id}-m{product_id}"}],
                }
            )
            pred_reactions.append(
                {
                    "score": 0.9,
                    "reactants": [
                        {"kind": "molecule", "bbox": _slot_box(i)} for i in reactant_ids
                    ],
                    "conditions": [{"kind": "text", "bbox": text_box}],
                    "products": [{"kind": "molecule", "bbox": _slot_box(product_id)}],
                }
            )

        n_pred = len(pred_molecules)
        total = total + CombinedCounts(
            tp=page_tp, fp=n_pred - page_tp, fn=n_mol - page_tp
        )
        gt_pages.append(
            {
                "page_id": page_id,
                "width": PAGE_WIDTH,
                "height": PAGE_HEIGHT,
                "molecules": gt_molecules,
                "reactions": gt_reactions,
            }
        )
        pred_pages.append(
            {
                "page_id": page_id,
                "molecules": pred_molecules,
                "reactions": pred_reactions,
            }
        )

    gt_obj = {"dataset": params.dataset, "pages": gt_pages}
    pred_obj = {"dataset": params.dataset, "pages": pred_pages}
    expected = {
        "tau": MATCH_TAU,
        "tp": total.tp,
        "fp": total.fp,
        "fn": total.fn,
        "conversion": {
            "pairs": conversion_pairs,
            "smiles_match_rate": (
                conversion_matches / conversion_pairs if conversion_pairs else 0.0
            ),
            "mean_tanimoto": (
                conversion_tanimoto / conversion_pairs if conversion_pairs else 0.0
            ),
        },
    }
    return gt_obj, pred_obj, expected


def generate_fixture(
    seed: int, params: FixtureParams, out_dir: str | Path
) -> tuple[Path, Path, Path]:
    """Write gt.json, pred.json, expected.json; byte-deterministic per seed."""
    gt_obj, pred_obj, expected = build_fixture(seed, params)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = (out / "gt.json", out / "pred.json", out / "expected.json")
    for path, obj in zip(paths, (gt_obj, pred_obj, expected)):
        path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
    return paths
