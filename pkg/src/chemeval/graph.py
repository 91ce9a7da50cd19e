"""Molecular graph core: normalization, canonical SMILES, isomorphism, fingerprints.

Normalization applies two documented rules:

1. Implicit hydrogen completion from a fixed valence table
   (B 3, C 4, N 3, O 2, P 3/5, S 2/4/6, halogens 1), charge-adjusted:
   carbon uses 4 - |charge|, every other table element uses valence + charge.
   The smallest allowed valence >= the atom's bonded order sum is chosen;
   aromatic bonds count 1.5 and the sum is floored before comparison.

2. Ring aromatization: a ring of size 5-7 is rewritten to aromatic atoms and
   bonds when every member is sp2-capable (table element B/C/N/O/P/S, no
   triple bond, at most one double bond, <= 3 sigma connections counting
   hydrogens) and the summed pi contributions are congruent to 2 mod 4.
   Per-atom pi contributions:

   * double bond inside the ring                      -> 1
   * double bond exocyclic to the ring                -> 0
   * C  (no double bond): anion 2, cation 0, aromatic-flagged 1, else not capable
   * N/P (no double bond): 3 sigma connections 2, anion 2, aromatic-flagged 1,
     else not capable
   * O/S (no double bond)                             -> 2
   * B   (no double bond)                             -> 0

   Perception only adds aromaticity; atoms/bonds flagged aromatic on input
   stay aromatic, which makes normalization idempotent.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from typing import Sequence

from .elements import AROMATIC_CAPABLE, ATOMIC_NUMBERS, DEFAULT_VALENCES, ORGANIC_SUBSET
from .errors import OracleCapacityError, ValenceError

BOND_ORDERS = ("single", "double", "triple", "aromatic")
BOND_ORDER_VALUE = {"single": 1.0, "double": 2.0, "triple": 3.0, "aromatic": 1.5}
BOND_ORDER_CODE = {"single": 1, "double": 2, "triple": 3, "aromatic": 4}
STEREO_MARKS = ("none", "wedge", "hash", "wavy")

ISOMORPHISM_ATOM_CAP = 64


@dataclass(frozen=True)
class Atom:
    """One node of a molecular graph; position in Molecule.atoms is its index."""

    element: str
    charge: int = 0
    isotope: int | None = None
    explicit_h: int | None = None
    aromatic: bool = False
    coords: tuple[float, float, float] | None = None
    chirality: str | None = None  # "@" / "@@", preserved but never compared


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: str = "single"
    stereo_mark: str = "none"
    direction: str | None = None  # "/" or "\\", preserved but never compared

    def __post_init__(self):
        if self.order not in BOND_ORDERS:
            raise ValueError(f"unknown bond order {self.order!r}")
        if self.stereo_mark not in STEREO_MARKS:
            raise ValueError(f"unknown stereo mark {self.stereo_mark!r}")

    def pair(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


@dataclass(frozen=True)
class Molecule:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("molecule must have at least one atom")
        n = len(self.atoms)
        seen: set[tuple[int, int]] = set()
        for bond in self.bonds:
            if bond.a == bond.b:
                raise ValueError(f"self-bond on atom {bond.a}")
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise ValueError(f"bond {bond.a}-{bond.b} out of range")
            pair = bond.pair()
            if pair in seen:
                raise ValueError(f"duplicate bond {pair[0]}-{pair[1]}")
            seen.add(pair)


def molecule(atoms, bonds) -> Molecule:
    """Convenience constructor accepting any iterables."""
    return Molecule(tuple(atoms), tuple(bonds))


# ---------------------------------------------------------------------------
# adjacency helpers


def neighbor_table(mol: Molecule) -> list[list[tuple[int, Bond]]]:
    table: list[list[tuple[int, Bond]]] = [[] for _ in mol.atoms]
    for bond in mol.bonds:
        table[bond.a].append((bond.b, bond))
        table[bond.b].append((bond.a, bond))
    return table


def connected_components(
    mol: Molecule, nbrs: list[list[tuple[int, Bond]]] | None = None
) -> list[list[int]]:
    if nbrs is None:
        nbrs = neighbor_table(mol)
    seen = [False] * len(mol.atoms)
    comps = []
    for start in range(len(mol.atoms)):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            i = stack.pop()
            comp.append(i)
            for j, _ in nbrs[i]:
                if not seen[j]:
                    seen[j] = True
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


# ---------------------------------------------------------------------------
# normalization


def _allowed_valences(element: str, charge: int) -> tuple[int, ...] | None:
    valences = DEFAULT_VALENCES.get(element)
    if valences is None:
        return None
    if element == "C":
        return (max(0, 4 - abs(charge)),)
    return tuple(sorted(max(0, v + charge) for v in valences))


def _bonded_valence_floor(orders: Sequence[str]) -> int:
    """Minimum valence consumed by the given bonds (aromatic counts 1 sigma)."""
    total = 0
    has_aromatic = False
    for order in orders:
        if order == "aromatic":
            has_aromatic = True
            total += 1
        else:
            total += int(BOND_ORDER_VALUE[order])
    if not has_aromatic:
        # floor of the exact sum equals the integer sum here
        return total
    return total


def implied_hydrogens(element: str, charge: int, orders: Sequence[str]) -> int | None:
    """Hydrogen count implied by the valence table, or None if off-table.

    Non-aromatic atoms need the floor of their bond-order sum, filled to the
    smallest allowed valence. Atoms with aromatic bonds use only the lowest
    allowed valence: one sigma per aromatic bond plus one pi slot when it
    fits, else the lone-pair form (aromatic c -> 1 H in benzene, n -> 0 H in
    pyridine, o/s -> 0 H in furan/thiophene). Returns -1 when the bonded
    demand exceeds every allowed valence.
    """
    allowed = _allowed_valences(element, charge)
    if allowed is None:
        return None
    has_aromatic = any(order == "aromatic" for order in orders)
    if has_aromatic:
        base = _bonded_valence_floor(orders)
        candidates = (base + 1, base)
        allowed = (min(allowed),)
    else:
        candidates = (math.floor(sum(BOND_ORDER_VALUE[o] for o in orders)),)
    for needed in candidates:
        for valence in allowed:
            if needed <= valence:
                return valence - needed
    return -1


def _bond_order_sums(mol: Molecule) -> list[float]:
    sums = [0.0] * len(mol.atoms)
    for bond in mol.bonds:
        value = BOND_ORDER_VALUE[bond.order]
        sums[bond.a] += value
        sums[bond.b] += value
    return sums


def _atom_bond_orders(mol: Molecule) -> list[list[str]]:
    orders: list[list[str]] = [[] for _ in mol.atoms]
    for bond in mol.bonds:
        orders[bond.a].append(bond.order)
        orders[bond.b].append(bond.order)
    return orders


@functools.lru_cache(maxsize=4096)
def _implied_hydrogens_cached(
    element: str, charge: int, sorted_orders: tuple[str, ...]
) -> int | None:
    # implied_hydrogens only aggregates over orders, so sorting is harmless
    return implied_hydrogens(element, charge, sorted_orders)


def _complete_hydrogens(mol: Molecule) -> Molecule:
    per_atom = _atom_bond_orders(mol)
    atoms = []
    for i, atom in enumerate(mol.atoms):
        orders = per_atom[i]
        if atom.explicit_h is None:
            implied = _implied_hydrogens_cached(
                atom.element, atom.charge, tuple(sorted(orders))
            )
            h = implied if implied is not None else 0
            if h < 0:
                raise ValenceError(
                    i, f"{atom.element} over-bonded for the valence table"
                )
            atoms.append(replace(atom, explicit_h=h))
        else:
            allowed = _allowed_valences(atom.element, atom.charge)
            if allowed is not None:
                if any(o == "aromatic" for o in orders):
                    needed = _bonded_valence_floor(orders)
                else:
                    needed = math.floor(sum(BOND_ORDER_VALUE[o] for o in orders))
                if needed + atom.explicit_h > max(allowed) + (
                    1 if any(o == "aromatic" for o in orders) else 0
                ):
                    raise ValenceError(
                        i,
                        f"{atom.element} bonded demand {needed} + {atom.explicit_h} H "
                        f"exceeds max valence {max(allowed)}",
                    )
            atoms.append(atom)
    return Molecule(tuple(atoms), mol.bonds)


def _candidate_rings(mol: Molecule, min_size: int = 5, max_size: int = 7) -> list[tuple[int, ...]]:
    nbrs = neighbor_table(mol)
    n = len(mol.atoms)
    # strip leaves iteratively: only the 2-core can sit on a ring
    degree = [len(lst) for lst in nbrs]
    alive = [True] * n
    stack = [i for i in range(n) if degree[i] <= 1]
    while stack:
        i = stack.pop()
        if not alive[i]:
            continue
        alive[i] = False
        for j, _ in nbrs[i]:
            if alive[j]:
                degree[j] -= 1
                if degree[j] <= 1:
                    stack.append(j)
    if not any(alive):
        return []
    adjacency = [
        [j for j, _ in lst if alive[j]] if alive[i] else []
        for i, lst in enumerate(nbrs)
    ]
    rings: list[tuple[int, ...]] = []
    seen: set[frozenset[tuple[int, int]]] = set()

    def edge_key(path: list[int]) -> frozenset[tuple[int, int]]:
        edges = []
        for k in range(len(path)):
            a, b = path[k], path[(k + 1) % len(path)]
            edges.append((a, b) if a < b else (b, a))
        return frozenset(edges)

    def dfs(start: int, current: int, path: list[int], on_path: set[int]):
        for nxt in adjacency[current]:
            if nxt == start and len(path) >= min_size:
                key = edge_key(path)
                if key not in seen:
                    seen.add(key)
                    rings.append(tuple(path))
            elif nxt > start and nxt not in on_path and len(path) < max_size:
                path.append(nxt)
                on_path.add(nxt)
                dfs(start, nxt, path, on_path)
                path.pop()
                on_path.remove(nxt)

    for start in range(n):
        if alive[start]:
            dfs(start, start, [start], {start})
    return rings


def _pi_contribution(
    i: int,
    ring: set[int],
    atoms: list[Atom],
    nbrs: list[list[tuple[int, str]]],
) -> int | None:
    atom = atoms[i]
    if atom.element not in AROMATIC_CAPABLE:
        return None
    doubles_in = doubles_out = 0
    heavy = 0
    for j, order in nbrs[i]:
        heavy += 1
        if order == "triple":
            return None
        if order == "double":
            if j in ring:
                doubles_in += 1
            else:
                doubles_out += 1
    h = atom.explicit_h or 0
    if heavy + h > 3 or doubles_in + doubles_out > 1:
        return None
    if doubles_in:
        return 1
    if doubles_out:
        return 0
    element = atom.element
    if element == "C":
        if atom.charge < 0:
            return 2
        if atom.charge > 0:
            return 0
        return 1 if atom.aromatic else None
    if element in ("N", "P"):
        if heavy + h == 3:
            return 2
        if atom.charge < 0:
            return 2
        return 1 if atom.aromatic else None
    if element in ("O", "S"):
        return 2
    if element == "B":
        return 0
    return None


def _aromatize(mol: Molecule) -> Molecule:
    rings = _candidate_rings(mol)
    if not rings:
        return mol
    atoms = list(mol.atoms)
    bond_order: dict[tuple[int, int], str] = {b.pair(): b.order for b in mol.bonds}
    nbrs: list[list[tuple[int, str]]] = [[] for _ in atoms]
    for bond in mol.bonds:
        nbrs[bond.a].append((bond.b, bond.order))
        nbrs[bond.b].append((bond.a, bond.order))

    def refresh_nbrs():
        for lst in nbrs:
            lst.clear()
        for (a, b), order in bond_order.items():
            nbrs[a].append((b, order))
            nbrs[b].append((a, order))

    accepted = [False] * len(rings)
    changed = True
    while changed:
        changed = False
        for ridx, ring in enumerate(rings):
            if accepted[ridx]:
                continue
            ring_set = set(ring)
            total = 0
            ok = True
            for i in ring:
                contrib = _pi_contribution(i, ring_set, atoms, nbrs)
                if contrib is None:
                    ok = False
                    break
                total += contrib
            if not ok or total % 4 != 2:
                continue
            accepted[ridx] = True
            changed = True
            for i in ring:
                if not atoms[i].aromatic:
                    atoms[i] = replace(atoms[i], aromatic=True)
            for k in range(len(ring)):
                a, b = ring[k], ring[(k + 1) % len(ring)]
                pair = (a, b) if a < b else (b, a)
                bond_order[pair] = "aromatic"
            refresh_nbrs()

    bonds = tuple(
        replace(b, order=bond_order[b.pair()]) if bond_order[b.pair()] != b.order else b
        for b in mol.bonds
    )
    return Molecule(tuple(atoms), bonds)


def normalize(mol: Molecule) -> Molecule:
    """Complete implicit hydrogens, then aromatize qualifying rings."""
    return _aromatize(_complete_hydrogens(mol))


# ---------------------------------------------------------------------------
# canonicalization (Morgan-style refinement + tie-break search)


def _initial_invariant(atom: Atom, degree: int) -> tuple:
    return (
        atom.element,
        atom.charge,
        atom.isotope or 0,
        degree,
        atom.explicit_h or 0,
        atom.aromatic,
    )


def _dense_ranks(values: list) -> list[int]:
    index = {v: r for r, v in enumerate(sorted(set(values)))}
    return [index[v] for v in values]


def _refine(ranks: list[int], nbrs: list[list[tuple[int, int]]]) -> list[int]:
    n_classes = len(set(ranks))
    while True:
        sigs = []
        for i, r in enumerate(ranks):
            around = [(code, ranks[j]) for j, code in nbrs[i]]
            around.sort()
            sigs.append((r, tuple(around)))
        new_ranks = _dense_ranks(sigs)
        new_classes = len(set(new_ranks))
        if new_classes == n_classes:
            return new_ranks
        ranks = new_ranks
        n_classes = new_classes


def _bare_token_allowed(atom: Atom, orders: Sequence[str]) -> bool:
    if atom.charge != 0 or atom.isotope is not None:
        return False
    if atom.element == "*":
        return (atom.explicit_h or 0) == 0
    if atom.element not in ORGANIC_SUBSET:
        return False
    implied = implied_hydrogens(atom.element, 0, orders)
    return implied == (atom.explicit_h or 0)


def _atom_token(atom: Atom, orders: Sequence[str]) -> str:
    symbol = atom.element.lower() if atom.aromatic else atom.element
    if _bare_token_allowed(atom, orders):
        return symbol
    parts = ["["]
    if atom.isotope is not None:
        parts.append(str(atom.isotope))
    parts.append(symbol)
    h = atom.explicit_h or 0
    if h == 1:
        parts.append("H")
    elif h > 1:
        parts.append(f"H{h}")
    charge = atom.charge
    if charge == 1:
        parts.append("+")
    elif charge == -1:
        parts.append("-")
    elif charge > 1:
        parts.append(f"+{charge}")
    elif charge < -1:
        parts.append(str(charge))
    parts.append("]")
    return "".join(parts)


@functools.lru_cache(maxsize=8192)
def _cached_atom_token(atom: Atom, sorted_orders: tuple[str, ...]) -> str:
    # token depends only on the atom value and its multiset of bond orders
    return _atom_token(atom, sorted_orders)


def _bond_token(order: str, a: Atom, b: Atom) -> str:
    if order == "single":
        return "-" if (a.aromatic and b.aromatic) else ""
    if order == "aromatic":
        return "" if (a.aromatic and b.aromatic) else ":"
    if order == "double":
        return "="
    return "#"


def _ring_digit(number: int) -> str:
    return str(number) if number < 10 else f"%{number:02d}"


def _write_component(
    mol: Molecule,
    comp: list[int],
    ranks: dict[int, int],
    nbrs: list[list[tuple[int, Bond]]],
    tokens: list[str],
) -> tuple[str, list[int]]:
    root = min(comp, key=lambda i: ranks[i])
    visited: set[int] = set()
    order: list[int] = []
    used_pairs: set[tuple[int, int]] = set()
    children: dict[int, list[tuple[int, Bond]]] = {}
    back_edges: list[tuple[int, int, Bond]] = []  # (opener, closer, bond)

    def explore(i: int):
        visited.add(i)
        order.append(i)
        kids: list[tuple[int, Bond]] = []
        # ranks are all distinct here, so the (j, bond) tail never compares
        around = sorted((ranks[j], j, bond) for j, bond in nbrs[i])
        for _, j, bond in around:
            pair = (i, j) if i < j else (j, i)
            if pair in used_pairs:
                continue
            used_pairs.add(pair)
            if j in visited:
                # j was reached first, so it opens the ring closure
                back_edges.append((j, i, bond))
            else:
                kids.append((j, bond))
                explore(j)
        children[i] = kids

    explore(root)

    closure_at: dict[int, list[tuple[int, Bond, bool]]] = {i: [] for i in comp}
    for number, (opener, closer, bond) in enumerate(back_edges, start=1):
        closure_at[opener].append((number, bond, True))
        closure_at[closer].append((number, bond, False))

    out: list[str] = []

    def emit(i: int, incoming: Bond | None):
        if incoming is not None:
            other = incoming.a if incoming.b == i else incoming.b
            out.append(_bond_token(incoming.order, mol.atoms[other], mol.atoms[i]))
        out.append(tokens[i])
        for number, bond, opening in sorted(closure_at[i]):
            if opening:
                other = bond.a if bond.b == i else bond.b
                out.append(_bond_token(bond.order, mol.atoms[i], mol.atoms[other]))
            out.append(_ring_digit(number))
        kids = children[i]
        for k, (child, bond) in enumerate(kids):
            if k < len(kids) - 1:
                out.append("(")
                emit(child, bond)
                out.append(")")
            else:
                emit(child, bond)

    emit(root, None)
    return "".join(out), order


def _canon_component(
    mol: Molecule,
    comp: list[int],
    nbrs: list[list[tuple[int, Bond]]],
    tokens: list[str],
) -> tuple[str, list[int]]:
    # work in component-local indices so ranks are plain lists
    if len(comp) == len(mol.atoms):
        code_nbrs: list[list[tuple[int, int]]] = [
            [(j, BOND_ORDER_CODE[bond.order]) for j, bond in nbrs[g]] for g in comp
        ]
    else:
        local = {g: k for k, g in enumerate(comp)}
        code_nbrs = [
            [(local[j], BOND_ORDER_CODE[bond.order]) for j, bond in nbrs[g]]
            for g in comp
        ]
    initial = [
        _initial_invariant(mol.atoms[g], len(code_nbrs[k]))
        for k, g in enumerate(comp)
    ]
    ranks = _refine(_dense_ranks(initial), code_nbrs)

    def search(ranks: list[int]) -> tuple[str, list[int]]:
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = sorted(r for r, c in counts.items() if c > 1)
        if not tied:
            global_ranks = {g: ranks[k] for k, g in enumerate(comp)}
            return _write_component(mol, comp, global_ranks, nbrs, tokens)
        cell_rank = tied[0]
        best: tuple[str, list[int]] | None = None
        for chosen, rank in enumerate(ranks):
            if rank != cell_rank:
                continue
            seeded = [(r, 1) for r in ranks]
            seeded[chosen] = (cell_rank, 0)
            new_ranks = _refine(_dense_ranks(seeded), code_nbrs)
            candidate = search(new_ranks)
            if best is None or candidate[0] < best[0]:
                best = candidate
        assert best is not None
        return best

    return search(ranks)


def canonical_key_and_order(mol: Molecule) -> tuple[str, list[int]]:
    """Canonical SMILES plus the atom order realizing it.

    Fragments are serialized independently and joined by "." in lexicographic
    order of their canonical strings.
    """
    nbrs = neighbor_table(mol)
    atom_orders = _atom_bond_orders(mol)
    # atom tokens are rank-independent: compute once, not per tie-break leaf
    tokens = [
        _cached_atom_token(atom, tuple(sorted(atom_orders[i])))
        for i, atom in enumerate(mol.atoms)
    ]
    results = [
        _canon_component(mol, comp, nbrs, tokens)
        for comp in connected_components(mol, nbrs)
    ]
    results.sort(key=lambda item: item[0])
    key = ".".join(s for s, _ in results)
    order = [i for _, frag_order in results for i in frag_order]
    return key, order


def canonical_key(mol: Molecule) -> str:
    """Deterministic canonical SMILES, invariant under atom relabeling."""
    return canonical_key_and_order(mol)[0]


def canonical_order(mol: Molecule) -> list[int]:
    return canonical_key_and_order(mol)[1]


# ---------------------------------------------------------------------------
# isomorphism oracle


def _iso_invariant(atom: Atom, degree: int) -> tuple:
    return (
        atom.element,
        atom.charge,
        atom.isotope or 0,
        degree,
        atom.explicit_h or 0,
        atom.aromatic,
    )


def isomorphic(a: Molecule, b: Molecule) -> bool:
    """Exact graph isomorphism by backtracking with invariant pruning.

    Matches element, charge, isotope, aromatic flag, hydrogen count, and bond
    orders. Capped at 64 atoms per side.
    """
    if len(a.atoms) > ISOMORPHISM_ATOM_CAP or len(b.atoms) > ISOMORPHISM_ATOM_CAP:
        raise OracleCapacityError(
            f"isomorphism oracle capped at {ISOMORPHISM_ATOM_CAP} atoms"
        )
    if len(a.atoms) != len(b.atoms) or len(a.bonds) != len(b.bonds):
        return False

    nbrs_a = neighbor_table(a)
    nbrs_b = neighbor_table(b)
    inv_a = [_iso_invariant(at, len(nbrs_a[i])) for i, at in enumerate(a.atoms)]
    inv_b = [_iso_invariant(at, len(nbrs_b[i])) for i, at in enumerate(b.atoms)]
    if sorted(inv_a) != sorted(inv_b):
        return False

    bond_b: dict[tuple[int, int], str] = {bd.pair(): bd.order for bd in b.bonds}
    n = len(a.atoms)

    # visit a's atoms in an order that keeps the frontier connected
    order: list[int] = []
    placed = [False] * n
    remaining = set(range(n))
    while remaining:
        frontier = [i for i in remaining if any(placed[j] for j, _ in nbrs_a[i])]
        nxt = min(frontier) if frontier else min(remaining)
        order.append(nxt)
        placed[nxt] = True
        remaining.discard(nxt)

    mapping: dict[int, int] = {}
    used_b: set[int] = set()

    def backtrack(depth: int) -> bool:
        if depth == n:
            return True
        i = order[depth]
        mapped_nbrs = [(j, bd.order) for j, bd in nbrs_a[i] if j in mapping]
        for cand in range(n):
            if cand in used_b or inv_b[cand] != inv_a[i]:
                continue
            ok = True
            for j, bond_order in mapped_nbrs:
                pair = (mapping[j], cand) if mapping[j] < cand else (cand, mapping[j])
                if bond_b.get(pair) != bond_order:
                    ok = False
                    break
            if not ok:
                continue
            # also forbid extra bonds from cand to mapped atoms
            mapped_images = {mapping[j] for j, _ in nbrs_a[i] if j in mapping}
            extra = False
            for jb, _ in nbrs_b[cand]:
                if jb in used_b and jb not in mapped_images:
                    extra = True
                    break
            if extra:
                continue
            mapping[i] = cand
            used_b.add(cand)
            if backtrack(depth + 1):
                return True
            del mapping[i]
            used_b.discard(cand)
        return False

    return backtrack(0)


# ---------------------------------------------------------------------------
# fingerprints

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1


def _fnv1a(values: tuple[int, ...]) -> int:
    """FNV-1a over the big-endian 8-byte encodings of each value."""
    h = _FNV_OFFSET
    for value in values:
        for shift in (56, 48, 40, 32, 24, 16, 8, 0):
            h = ((h ^ ((value >> shift) & 0xFF)) * _FNV_PRIME) & _U64
    return h


@dataclass(frozen=True)
class Fingerprint:
    bits: int
    nbits: int = 2048

    def count(self) -> int:
        return self.bits.bit_count()

    def positions(self) -> list[int]:
        return [k for k in range(self.nbits) if (self.bits >> k) & 1]


def fingerprint(mol: Molecule, radius: int = 2, nbits: int = 2048) -> Fingerprint:
    """Circular environment fingerprint folded into nbits.

    Radius-0 seeds hash (atomic number, charge+512, isotope, degree, H count,
    aromatic flag) with FNV-1a; each iteration rehashes (previous hash, sorted
    (bond code, neighbor hash) list). Every environment at radii 0..radius
    sets bit (hash mod nbits).
    """
    nbrs = neighbor_table(mol)
    hashes = []
    for i, atom in enumerate(mol.atoms):
        atomic = ATOMIC_NUMBERS.get(atom.element, 0)
        hashes.append(
            _fnv1a(
                (
                    atomic,
                    atom.charge + 512,
                    atom.isotope or 0,
                    len(nbrs[i]),
                    atom.explicit_h or 0,
                    int(atom.aromatic),
                )
            )
        )
    bits = 0
    for h in hashes:
        bits |= 1 << (h % nbits)
    for _ in range(radius):
        new_hashes = []
        for i in range(len(mol.atoms)):
            env = sorted(
                (BOND_ORDER_CODE[bond.order], hashes[j]) for j, bond in nbrs[i]
            )
            flat = [hashes[i]]
            for code, nh in env:
                flat.append(code)
                flat.append(nh)
            new_hashes.append(_fnv1a(tuple(flat)))
        hashes = new_hashes
        for h in hashes:
            bits |= 1 << (h % nbits)
    return Fingerprint(bits=bits, nbits=nbits)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a AND b| / |a OR b|; 1.0 when both are empty."""
    if a.nbits != b.nbits:
        raise ValueError(f"fingerprint length mismatch: {a.nbits} vs {b.nbits}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union
