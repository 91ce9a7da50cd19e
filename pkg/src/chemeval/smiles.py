"""SMILES subset parser and canonical writer.

Supported grammar: organic-subset atoms (B, C, N, O, P, S, F, Cl, Br, I) and
their aromatic lowercase forms (b, c, n, o, p, s), the wildcard "*", bracket
atoms [isotope? symbol chirality? Hcount? charge?], bond symbols - = # : / \\,
branches, ring-closure digits and %nn, and dot disconnection. Chirality tokens
and /\\ bond directions are parsed and preserved as inert annotations.
"""

from __future__ import annotations

import re

from .elements import ELEMENT_SYMBOLS, ORGANIC_SUBSET
from .errors import SmilesParseError
from .graph import Atom, Bond, Molecule, canonical_key

_BRACKET = re.compile(
    r"\[(?P<isotope>\d+)?"
    r"(?P<symbol>\*|[A-Z][a-z]?|[bcnops])"
    r"(?P<chirality>@@|@)?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>\+\++|--+|[+-]\d*)?"
    r"\]"
)

_AROMATIC_BARE = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
_TWO_LETTER_BARE = ("Cl", "Br")
_BOND_SYMBOLS = {"-": "single", "=": "double", "#": "triple", ":": "aromatic"}


def _parse_charge(token: str | None, offset: int) -> int:
    if not token:
        return 0
    if token in ("+", "-"):
        return 1 if token == "+" else -1
    if set(token) == {"+"}:
        return len(token)
    if set(token) == {"-"}:
        return -len(token)
    sign = 1 if token[0] == "+" else -1
    try:
        return sign * int(token[1:])
    except ValueError:
        raise SmilesParseError(f"bad charge token {token!r}", offset) from None


def parse_smiles(text: str) -> Molecule:
    """Parse a SMILES string into an un-normalized Molecule."""
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    bond_pairs: set[tuple[int, int]] = set()
    prev: int | None = None
    pending: tuple[str | None, str | None] | None = None  # (order, direction)
    pending_offset = 0
    branch_stack: list[int | None] = []
    open_rings: dict[int, tuple[int, str | None, str | None, int]] = {}
    i = 0
    n = len(text)

    def add_bond(a: int, b: int, order: str | None, direction: str | None, offset: int):
        if a == b:
            raise SmilesParseError("ring bond closes onto the same atom", offset)
        pair = (a, b) if a < b else (b, a)
        if pair in bond_pairs:
            raise SmilesParseError(f"two bonds between atoms {a} and {b}", offset)
        bond_pairs.add(pair)
        if order is None:
            order = (
                "aromatic"
                if atoms[a].aromatic and atoms[b].aromatic
                else "single"
            )
        bonds.append(Bond(a, b, order=order, direction=direction))

    def attach(atom_index: int, offset: int):
        nonlocal prev, pending
        if prev is not None:
            order, direction = pending if pending else (None, None)
            add_bond(prev, atom_index, order, direction, offset)
        elif pending is not None:
            raise SmilesParseError("bond symbol with no preceding atom", pending_offset)
        pending = None
        prev = atom_index

    while i < n:
        ch = text[i]
        if ch == "[":
            m = _BRACKET.match(text, i)
            if not m:
                raise SmilesParseError("malformed bracket atom", i)
            symbol = m.group("symbol")
            aromatic = symbol[0].islower()
            element = _AROMATIC_BARE.get(symbol, symbol) if aromatic else symbol
            if element != "*" and element not in ELEMENT_SYMBOLS:
                raise SmilesParseError(f"unknown element {element!r}", i)
            hcount_tok = m.group("hcount")
            if hcount_tok is None:
                hcount = 0
            elif hcount_tok == "H":
                hcount = 1
            else:
                hcount = int(hcount_tok[1:])
            atoms.append(
                Atom(
                    element=element,
                    charge=_parse_charge(m.group("charge"), i),
                    isotope=int(m.group("isotope")) if m.group("isotope") else None,
                    explicit_h=hcount,
                    aromatic=aromatic,
                    chirality=m.group("chirality"),
                )
            )
            attach(len(atoms) - 1, i)
            i = m.end()
        elif ch == "*" or ch.isalpha():
            if ch == "*":
                element, aromatic = "*", False
                width = 1
            elif text[i : i + 2] in _TWO_LETTER_BARE:
                element, aromatic = text[i : i + 2], False
                width = 2
            elif ch in _AROMATIC_BARE:
                element, aromatic = _AROMATIC_BARE[ch], True
                width = 1
            elif ch in ORGANIC_SUBSET:
                element, aromatic = ch, False
                width = 1
            else:
                raise SmilesParseError(f"unknown bare atom {ch!r}", i)
            atoms.append(Atom(element=element, aromatic=aromatic))
            attach(len(atoms) - 1, i)
            i += width
        elif ch in _BOND_SYMBOLS:
            if pending is not None:
                raise SmilesParseError("two consecutive bond symbols", i)
            pending = (_BOND_SYMBOLS[ch], None)
            pending_offset = i
            i += 1
        elif ch in ("/", "\\"):
            if pending is not None:
                raise SmilesParseError("two consecutive bond symbols", i)
            pending = ("single", ch)
            pending_offset = i
            i += 1
        elif ch == "(":
            if prev is None:
                raise SmilesParseError("branch with no preceding atom", i)
            branch_stack.append(prev)
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise SmilesParseError("unbalanced ')'", i)
            prev = branch_stack.pop()
            i += 1
        elif ch == ".":
            if pending is not None:
                raise SmilesParseError("bond symbol before '.'", i)
            prev = None
            i += 1
        elif ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesParseError("ring closure with no preceding atom", i)
            if ch == "%":
                if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                    raise SmilesParseError("malformed %nn ring closure", i)
                number = int(text[i + 1 : i + 3])
                width = 3
            else:
                number = int(ch)
                width = 1
            order, direction = pending if pending else (None, None)
            pending = None
            if number in open_rings:
                other, other_order, other_dir, other_off = open_rings.pop(number)
                if order and other_order and order != other_order:
                    raise SmilesParseError(
                        f"conflicting bond orders on ring closure {number}", i
                    )
                add_bond(
                    other,
                    prev,
                    order or other_order,
                    direction or other_dir,
                    i,
                )
            else:
                open_rings[number] = (prev, order, direction, i)
            i += width
        elif ch.isspace():
            raise SmilesParseError("whitespace inside SMILES", i)
        else:
            raise SmilesParseError(f"unexpected character {ch!r}", i)

    if branch_stack:
        raise SmilesParseError("unbalanced '('", n)
    if pending is not None:
        raise SmilesParseError("dangling bond symbol", n)
    if open_rings:
        number, (_, _, _, offset) = sorted(open_rings.items())[0]
        raise SmilesParseError(f"ring bond {number} never closed", offset)
    if not atoms:
        raise SmilesParseError("empty SMILES", 0)
    return Molecule(tuple(atoms), tuple(bonds))


def write_smiles(mol: Molecule) -> str:
    """Serialize a normalized molecule; identical to its canonical key."""
    return canonical_key(mol)
