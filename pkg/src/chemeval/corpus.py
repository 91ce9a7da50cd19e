"""Annotation/prediction JSON schemas, loaders, validators, and statistics.

File layout (documented with examples in the README):

    {"dataset": "<label>", "pages": [
      {"page_id": "...", "width": W, "height": H,
       "molecules": [{"id": "m1", "bbox": [x1, y1, x2, y2], "molfile": "..."}],
       "reactions": [{"reactants": [...], "conditions": [...], "products": [...]}]}
    ]}

Reaction entities are {"ref": "<molecule id>"} or {"kind": "molecule"|"text",
"bbox": [...]}. Prediction molecules carry "score" and {"structure":
{"format": "molfile"|"smiles", "value": "..."}} (optionally "id" for GT-box
conversion scoring); prediction reactions carry "score".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .combined import INVALID_KEY
from .detection import BBox, ScoredBox
from .errors import ChemevalError, CorpusError
from .graph import Molecule, canonical_key, normalize
from .molfile import MolfileDocument, parse_molfile
from .reactions import Reaction, RxnEntity
from .smiles import parse_smiles


@dataclass(frozen=True)
class CorpusStats:
    n_pages: int
    n_molecules: int
    n_reactions: int


@dataclass
class MoleculeAnnotation:
    id: str
    bbox: BBox
    document: MolfileDocument
    molecule: Molecule  # normalized
    key: str


@dataclass
class PageAnnotation:
    page_id: str
    width: float
    height: float
    molecules: list[MoleculeAnnotation]
    reactions: list[Reaction]


@dataclass
class GroundTruthCorpus:
    dataset: str
    pages: list[PageAnnotation]


@dataclass
class PredictedMolecule:
    bbox: BBox
    score: float
    structure_format: str
    structure_text: str
    id: str | None = None
    _key: str | None = field(default=None, repr=False)
    _molecule: Molecule | None = field(default=None, repr=False)

    @property
    def scored_box(self) -> ScoredBox:
        return ScoredBox(bbox=self.bbox, score=self.score)

    def molecule(self) -> Molecule | None:
        """Parsed, normalized structure; None when unparseable."""
        self._resolve()
        return self._molecule

    @property
    def key(self) -> str:
        """Canonical key, or the invalid sentinel when unparseable."""
        self._resolve()
        assert self._key is not None
        return self._key

    def _resolve(self):
        if self._key is not None:
            return
        try:
            if self.structure_format == "molfile":
                mol = parse_molfile(self.structure_text).molecule
            else:
                mol = parse_smiles(self.structure_text)
            mol = normalize(mol)
            self._molecule = mol
            self._key = canonical_key(mol)
        except (ChemevalError, ValueError):
            self._molecule = None
            self._key = INVALID_KEY


@dataclass
class PredictedReaction:
    score: float
    reaction: Reaction


@dataclass
class PagePrediction:
    page_id: str
    molecules: list[PredictedMolecule]
    reactions: list[PredictedReaction]


@dataclass
class PredictionCorpus:
    dataset: str
    pages: list[PagePrediction]


def _fail(where: str, message: str):
    raise CorpusError(f"{where}: {message}")


def _require(obj: dict, key: str, kind, where: str):
    if not isinstance(obj, dict):
        _fail(where, "expected an object")
    if key not in obj:
        _fail(where, f"missing field {key!r}")
    value = obj[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            _fail(where, f"field {key!r} must be a number")
        return float(value)
    if not isinstance(value, kind):
        _fail(where, f"field {key!r} must be {kind.__name__}")
    return value


def _parse_bbox(raw, where: str) -> BBox:
    if not isinstance(raw, list) or len(raw) != 4:
        _fail(where, "bbox must be [x1, y1, x2, y2]")
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        _fail(where, "bbox values must be numbers")
    try:
        return BBox(*(float(v) for v in raw))
    except ValueError as exc:
        _fail(where, f"invalid bbox: {exc}")
    raise AssertionError("unreachable")


def _parse_entities(raw, role: str, box_by_id: dict[str, BBox], where: str) -> list[RxnEntity]:
    if not isinstance(raw, list):
        _fail(where, f"{role} list must be an array")
    entities = []
    for k, item in enumerate(raw):
        spot = f"{where}, {role}[{k}]"
        if not isinstance(item, dict):
            _fail(spot, "entity must be an object")
        if "ref" in item:
            ref = item["ref"]
            if ref not in box_by_id:
                _fail(spot, f"unknown molecule id {ref!r}")
            bbox = box_by_id[ref]
            kind = "molecule"
        else:
            kind = _require(item, "kind", str, spot)
            bbox = _parse_bbox(_require(item, "bbox", list, spot), spot)
        try:
            entities.append(RxnEntity(role=role, kind=kind, bbox=bbox))
        except ValueError as exc:
            _fail(spot, str(exc))
    return entities


def _parse_reaction(raw, box_by_id: dict[str, BBox], where: str) -> Reaction:
    if not isinstance(raw, dict):
        _fail(where, "reaction must be an object")
    entities: list[RxnEntity] = []
    for role, key in (("reactant", "reactants"), ("condition", "conditions"), ("product", "products")):
        entities.extend(_parse_entities(raw.get(key, []), role, box_by_id, where))
    try:
        return Reaction(tuple(entities))
    except ValueError as exc:
        _fail(where, str(exc))
    raise AssertionError("unreachable")


def _load_json(path: str | Path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CorpusError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise CorpusError(f"{path}: top level must be an object")
    return data


def load_ground_truth(path: str | Path) -> GroundTruthCorpus:
    """Load and fully validate an annotation file; MOLfiles parse eagerly."""
    data = _load_json(path)
    dataset = _require(data, "dataset", str, str(path))
    raw_pages = _require(data, "pages", list, str(path))
    pages: list[PageAnnotation] = []
    seen_ids: set[str] = set()
    for raw_page in raw_pages:
        if not isinstance(raw_page, dict):
            _fail(str(path), "page must be an object")
        page_id = _require(raw_page, "page_id", str, str(path))
        where = f"page {page_id!r}"
        if page_id in seen_ids:
            _fail(str(path), f"duplicate page_id {page_id!r}")
        seen_ids.add(page_id)
        width = _require(raw_page, "width", float, where)
        height = _require(raw_page, "height", float, where)
        molecules: list[MoleculeAnnotation] = []
        box_by_id: dict[str, BBox] = {}
        for raw_mol in raw_page.get("molecules", []):
            mol_id = _require(raw_mol, "id", str, where)
            spot = f"{where}, molecule {mol_id!r}"
            if mol_id in box_by_id:
                _fail(spot, "duplicate molecule id")
            bbox = _parse_bbox(_require(raw_mol, "bbox", list, spot), spot)
            if bbox.x2 > width or bbox.y2 > height:
                _fail(spot, f"bbox exceeds page bounds {width}x{height}")
            molfile_text = _require(raw_mol, "molfile", str, spot)
            try:
                document = parse_molfile(molfile_text)
                normalized = normalize(document.molecule)
                key = canonical_key(normalized)
            except ChemevalError as exc:
                _fail(spot, f"invalid MOLfile: {exc}")
            box_by_id[mol_id] = bbox
            molecules.append(
                MoleculeAnnotation(
                    id=mol_id,
                    bbox=bbox,
                    document=document,
                    molecule=normalized,
                    key=key,
                )
            )
        reactions = [
            _parse_reaction(raw, box_by_id, f"{where}, reaction[{k}]")
            for k, raw in enumerate(raw_page.get("reactions", []))
        ]
        pages.append(
            PageAnnotation(
                page_id=page_id,
                width=width,
                height=height,
                molecules=molecules,
                reactions=reactions,
            )
        )
    return GroundTruthCorpus(dataset=dataset, pages=pages)


def load_predictions(path: str | Path) -> PredictionCorpus:
    """Load a prediction file; structures parse lazily and degrade to FPs."""
    data = _load_json(path)
    dataset = _require(data, "dataset", str, str(path))
    raw_pages = _require(data, "pages", list, str(path))
    pages: list[PagePrediction] = []
    seen_ids: set[str] = set()
    for raw_page in raw_pages:
        if not isinstance(raw_page, dict):
            _fail(str(path), "page must be an object")
        page_id = _require(raw_page, "page_id", str, str(path))
        where = f"page {page_id!r}"
        if page_id in seen_ids:
            _fail(str(path), f"duplicate page_id {page_id!r}")
        seen_ids.add(page_id)
        molecules: list[PredictedMolecule] = []
        for k, raw_mol in enumerate(raw_page.get("molecules", [])):
            spot = f"{where}, molecule[{k}]"
            bbox = _parse_bbox(_require(raw_mol, "bbox", list, spot), spot)
            score = _require(raw_mol, "score", float, spot)
            if not (0.0 <= score <= 1.0):
                _fail(spot, f"score out of range: {score}")
            structure = _require(raw_mol, "structure", dict, spot)
            fmt = _require(structure, "format", str, spot)
            if fmt not in ("molfile", "smiles"):
                _fail(spot, f"structure format must be molfile or smiles: {fmt!r}")
            value = _require(structure, "value", str, spot)
            mol_id = raw_mol.get("id")
            if mol_id is not None and not isinstance(mol_id, str):
                _fail(spot, "id must be a string")
            molecules.append(
                PredictedMolecule(
                    bbox=bbox,
                    score=score,
                    structure_format=fmt,
                    structure_text=value,
                    id=mol_id,
                )
            )
        reactions: list[PredictedReaction] = []
        for k, raw_rxn in enumerate(raw_page.get("reactions", [])):
            spot = f"{where}, reaction[{k}]"
            score = _require(raw_rxn, "score", float, spot) if "score" in raw_rxn else 1.0
            if not (0.0 <= score <= 1.0):
                _fail(spot, f"score out of range: {score}")
            reaction = _parse_reaction(raw_rxn, {}, spot)
            reactions.append(PredictedReaction(score=score, reaction=reaction))
        pages.append(
            PagePrediction(page_id=page_id, molecules=molecules, reactions=reactions)
        )
    return PredictionCorpus(dataset=dataset, pages=pages)


def corpus_stats(corpus: GroundTruthCorpus) -> CorpusStats:
    return CorpusStats(
        n_pages=len(corpus.pages),
        n_molecules=sum(len(p.molecules) for p in corpus.pages),
        n_reactions=sum(len(p.reactions) for p in corpus.pages),
    )
