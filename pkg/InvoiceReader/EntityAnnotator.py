# -*- coding: utf-8-*-
"""
Module : EntityAnnotator
Author : InvoiceReader team
Description :
    Named entity and address annotation of block lines.
    Entity recognizers and address parsers are pluggable by name; the shipped
    ones are a gazetteer/heuristic recognizer and a rule-based address parser.
    The location ensemble keeps address parts only when the block shows
    enough distinct address items across both sources.
"""
import logging
import re
import unicodedata
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

# Local imports
from InvoiceReader.DocModel import Annotation, AnnotationKind, Block, Line
from InvoiceReader.Errors import ConfigError
from InvoiceReader.PipelineConfig import PipelineConfig, resource_path

__all__ = [
    "ENTITY_LABELS",
    "AddressLabel",
    "Gazetteer",
    "EntityAnnotator",
    "GazetteerEntityAnnotator",
    "AddressParser",
    "RuleAddressParser",
    "gazetteer_annotate",
    "parse_address_parts",
    "annotate_addresses",
    "ensemble_locations",
    "load_gazetteer",
    "normalize",
    "register_entity_annotator",
    "register_address_parser",
    "make_entity_annotator",
    "make_address_parser",
]

logger = logging.getLogger(__name__)

ENTITY_LABELS = ("ORGANIZATION", "PERSON", "COUNTRY", "CITY", "LOCATION")


class AddressLabel(str, Enum):
    """Address part labels, ranked from most to least important"""

    COUNTRY = "country"
    CITY = "city"
    CITY_DISTRICT = "city_district"
    SUBURB = "suburb"
    POSTCODE = "postcode"
    ROAD = "road"
    HOUSE_NUMBER = "house_number"
    HOUSE = "house"

    @property
    def rank(self) -> int:
        return list(AddressLabel).index(self)


_PUNCT = ".,;:()[]{}\"'!?«»„“”"
_MAX_ORG_TOKENS = 8


def normalize(text: str) -> str:
    """Casefolded text without diacritics"""
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(c for c in decomposed if not unicodedata.combining(c)).casefold()


@dataclass(frozen=True)
class _Token:
    raw: str
    start: int
    end: int
    core_start: int
    core_end: int
    norm: str

    @property
    def core(self) -> str:
        return self.raw[self.core_start - self.start:self.core_end - self.start]


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    for match in re.finditer(r"\S+", text):
        raw = match.group(0)
        stripped_left = raw.lstrip(_PUNCT)
        core = stripped_left.rstrip(_PUNCT)
        core_start = match.start() + len(raw) - len(stripped_left)
        tokens.append(_Token(raw, match.start(), match.end(), core_start, core_start + len(core), normalize(core)))
    return tokens


def _phrase_key(phrase: str) -> Tuple[str, ...]:
    return tuple(t.norm for t in _tokenize(phrase) if t.norm)


@dataclass(frozen=True)
class Gazetteer:
    """
    Gazetteer : normalized word lists for one language.
    Multi-word entries are stored as tuples of normalized tokens.
    """

    language: str
    first_names: FrozenSet[str]
    cities: FrozenSet[Tuple[str, ...]]
    countries: FrozenSet[Tuple[str, ...]]
    regions: FrozenSet[Tuple[str, ...]] = frozenset()
    districts: FrozenSet[Tuple[str, ...]] = frozenset()
    legal_forms: FrozenSet[Tuple[str, ...]] = frozenset()
    street_suffixes: Tuple[str, ...] = ()
    street_prefixes: Tuple[str, ...] = ()
    stop_words: FrozenSet[str] = frozenset()

    @classmethod
    def from_lists(cls, language: str, first_names: Iterable[str] = (), cities: Iterable[str] = (),
                   countries: Iterable[str] = (), regions: Iterable[str] = (), districts: Iterable[str] = (),
                   legal_forms: Iterable[str] = (), street_suffixes: Iterable[str] = (),
                   street_prefixes: Iterable[str] = (), stop_words: Iterable[str] = ()) -> "Gazetteer":
        def keys(items):
            return frozenset(k for k in map(_phrase_key, items) if k)

        return cls(
            language,
            frozenset(normalize(n) for n in first_names),
            keys(cities),
            keys(countries),
            keys(regions),
            keys(districts),
            keys(legal_forms),
            tuple(sorted(set(street_suffixes), key=lambda s: (-len(s), s))),
            tuple(sorted(set(street_prefixes), key=lambda s: (-len(s), s))),
            frozenset(normalize(w) for w in stop_words),
        )

    def is_first_name(self, token: str) -> bool:
        return normalize(token) in self.first_names


_GAZETTEER_FILES = ("first_names", "cities", "countries", "regions", "districts", "legal_forms",
                    "street_suffixes", "street_prefixes", "address_stop_words")


def _read_word_list(path: Path) -> List[str]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read gazetteer list {path}: {e}") from e
    return [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]


@lru_cache(maxsize=8)
def _load_gazetteer(language: str, base: Optional[str]) -> Gazetteer:
    lang_dir = resource_path("gazetteers", language, base=base)
    if not lang_dir.is_dir():
        raise ConfigError(f"no gazetteer for language '{language}' under {lang_dir.parent}")
    lists: Dict[str, List[str]] = {name: [] for name in _GAZETTEER_FILES}
    for folder in ("common", language):
        for name in _GAZETTEER_FILES:
            path = resource_path("gazetteers", folder, name + ".txt", base=base)
            if path.is_file():
                lists[name].extend(_read_word_list(path))
    stop_words = lists.pop("address_stop_words")
    gaz = Gazetteer.from_lists(language, stop_words=stop_words, **lists)
    logger.debug("Gazetteer %s: %d first names, %d cities, %d countries",
                 language, len(gaz.first_names), len(gaz.cities), len(gaz.countries))
    return gaz


def load_gazetteer(language: str, base: Union[str, Path, None] = None) -> Gazetteer:
    return _load_gazetteer(language, None if base is None else str(base))


def _phrase_hits(tokens: Sequence[_Token], entries: FrozenSet[Tuple[str, ...]]) -> List[Tuple[int, int]]:
    """Longest entry match at each token start, left to right, as (first, last) token indexes"""
    if not entries:
        return []
    longest = max(len(e) for e in entries)
    hits = []
    i = 0
    while i < len(tokens):
        found = None
        for size in range(min(longest, len(tokens) - i), 0, -1):
            key = tuple(t.norm for t in tokens[i:i + size])
            if key in entries:
                found = size
                break
        if found:
            hits.append((i, i + found - 1))
            i += found
        else:
            i += 1
    return hits


def _overlaps(span: Tuple[int, int], taken: Iterable[Tuple[int, int]]) -> bool:
    return any(span[0] < e and s < span[1] for s, e in taken)


def _line_texts(lines: Sequence[Union[Line, str]]) -> List[str]:
    return [line if isinstance(line, str) else line.text for line in lines]


def _organizations(tokens: Sequence[_Token], gaz: Gazetteer) -> List[Tuple[int, int]]:
    spans = []
    if not gaz.legal_forms:
        return spans
    longest = max(len(e) for e in gaz.legal_forms)
    for last in range(len(tokens)):
        size = next((k for k in range(min(longest, last + 1), 0, -1)
                     if tuple(t.norm for t in tokens[last - k + 1:last + 1]) in gaz.legal_forms), None)
        if size is None:
            continue
        first = last - size + 1
        name_start = first
        while name_start > 0 and first - name_start < _MAX_ORG_TOKENS:
            prev = tokens[name_start - 1]
            if (not prev.norm or any(c.isdigit() for c in prev.raw) or prev.raw.endswith(":")
                    or prev.norm in gaz.stop_words):
                break
            name_start -= 1
        if name_start == first:
            continue
        end = tokens[last].core_end
        if tokens[last].raw[end - tokens[last].start:end - tokens[last].start + 1] == ".":
            end += 1
        spans.append((tokens[name_start].core_start, end))
    return sorted(spans, key=lambda s: (s[0] - s[1], s[0]))


def gazetteer_annotate(lines: Sequence[Union[Line, str]], gaz: Gazetteer) -> List[Annotation]:
    """
    Baseline entity recognizer: ORGANIZATION for a name run ending in a legal
    form, PERSON for a known first name followed by an alphabetic token,
    COUNTRY/CITY/LOCATION for gazetteer hits. Matching ignores case and
    diacritics, so the result does not change when the text is uppercased.
    Overlaps are resolved in that label order.
    """
    out = []
    for line_index, text in enumerate(_line_texts(lines)):
        tokens = _tokenize(text)
        candidates: List[Tuple[str, Tuple[int, int]]] = []
        candidates += [("ORGANIZATION", span) for span in _organizations(tokens, gaz)]
        for i in range(len(tokens) - 1):
            first, second = tokens[i], tokens[i + 1]
            if (first.norm in gaz.first_names and second.core.isalpha() and first.raw == first.core
                    and second.norm not in gaz.stop_words and (second.norm,) not in gaz.legal_forms):
                candidates.append(("PERSON", (first.core_start, second.core_end)))
        for label, entries in (("COUNTRY", gaz.countries), ("CITY", gaz.cities),
                               ("LOCATION", gaz.regions | gaz.districts)):
            for a, b in _phrase_hits(tokens, entries):
                candidates.append((label, (tokens[a].core_start, tokens[b].core_end)))
        taken: List[Tuple[int, int]] = []
        for label, span in candidates:
            if span[1] <= span[0] or _overlaps(span, taken):
                continue
            taken.append(span)
            out.append(Annotation(AnnotationKind.ENTITY, label, (line_index, span[0], span[1]),
                                  text[span[0]:span[1]], 1.0, "ner-gazetteer"))
    return sorted(out, key=lambda a: a.span)


class EntityAnnotator:
    """
    EntityAnnotator : named entity recognizer plugged into the pipeline.
    Subclasses return ENTITY annotations with labels from ENTITY_LABELS.
    """

    name = "base"

    def annotate(self, lines: Sequence[Union[Line, str]]) -> List[Annotation]:
        raise NotImplementedError


class GazetteerEntityAnnotator(EntityAnnotator):
    name = "gazetteer"

    def __init__(self, gazetteer: Gazetteer):
        self.gazetteer = gazetteer

    def annotate(self, lines: Sequence[Union[Line, str]]) -> List[Annotation]:
        return gazetteer_annotate(lines, self.gazetteer)


# ---------------------------------------------------------- addresses ------

_HOUSE = re.compile(r"(?<![\w/.,-])\d{1,5}[a-zA-Z]?(?:/\d{1,5}[a-zA-Z]?)?(?![\w/.-])")
_POSTCODES = (
    re.compile(r"(?<![\w/:.,+-])\d{3} ?\d{2}(?![\w/:-]|[.,]\d)"),
    re.compile(r"(?<![\w/:.,+-])\d{5}-\d{4}(?![\w/:-]|[.,]\d)"),
    re.compile(r"(?<!\w)[A-Z]{1,2}\d[A-Z\d]? ?\d[A-Z]{2}(?!\w)"),
    re.compile(r"(?<![\w/:.,+-])\d{4,6}(?![\w/:-]|[.,]\d)"),
)
_MAX_ROAD_TOKENS = 3


class AddressParser:
    """
    AddressParser : splits one line into labelled address parts.
    parse returns (AddressLabel, (start, end)) pairs sorted by start.
    """

    name = "base"

    def parse(self, text: str) -> List[Tuple[AddressLabel, Tuple[int, int]]]:
        raise NotImplementedError


class RuleAddressParser(AddressParser):
    """
    Rule-based address parser:
        road from a street-type lexicon ("341 George St", "nám. Míru 12")
        or a street name followed by a house number ("Mahenova 9/181")
        postcode by pattern, outside road and house number spans
        city, country and suburb from the gazetteer
    """

    name = "rules"

    def __init__(self, gazetteer: Gazetteer):
        self.gazetteer = gazetteer
        word = r"[^\W\d_][\w'.-]*"
        self._suffix_road = None
        self._prefix_road = None
        if gazetteer.street_suffixes:
            suffixes = "|".join(re.escape(s) for s in gazetteer.street_suffixes)
            self._suffix_road = re.compile(
                r"(?:(?<![\w/.-])(?P<house>\d{1,5}[A-Za-z]?(?:[-/]\d{1,5}[A-Za-z]?)?)\s+)?"
                r"(?P<road>(?:" + word + r"\s+){1,3}?(?:" + suffixes + r"))(?![\w])",
                re.IGNORECASE,
            )
        if gazetteer.street_prefixes:
            prefixes = "|".join(re.escape(s) for s in gazetteer.street_prefixes)
            self._prefix_road = re.compile(
                r"(?<!\w)(?P<road>(?:" + prefixes + r")\s*" + word + r"(?:\s+" + word + r"){0,2}?)"
                r"\s+(?P<house>\d{1,5}[a-zA-Z]?(?:/\d{1,5}[a-zA-Z]?)?)(?![\w/])",
                re.IGNORECASE,
            )

    def _lexicon_roads(self, text: str, taken: List[Tuple[int, int]], out: list):
        for pattern in (self._prefix_road, self._suffix_road):
            if pattern is None:
                continue
            for match in pattern.finditer(text):
                road = match.span("road")
                house = match.span("house") if match.group("house") else None
                if _overlaps(road, taken) or (house and _overlaps(house, taken)):
                    continue
                if pattern is self._suffix_road and house is None and not match.group("road")[0].isupper():
                    continue
                out.append((AddressLabel.ROAD, road))
                taken.append(road)
                if house:
                    out.append((AddressLabel.HOUSE_NUMBER, house))
                    taken.append(house)

    def _numbered_roads(self, text: str, tokens: List[_Token], taken: List[Tuple[int, int]], out: list):
        for match in _HOUSE.finditer(text):
            house = match.span()
            if _overlaps(house, taken):
                continue
            if "/" not in match.group(0) and (len(match.group(0)) > 4 or not re.match(r"\s*(?:,|$)", text[house[1]:])):
                continue
            before = [t for t in tokens if t.end <= house[0]]
            kept: List[_Token] = []
            for token in reversed(before):
                if (len(kept) == _MAX_ROAD_TOKENS or not token.core.isalpha() or token.raw.endswith((":", ","))
                        or token.norm in self.gazetteer.stop_words):
                    break
                kept.insert(0, token)
            if not kept or not kept[-1].core[0].isupper():
                continue
            road = (kept[0].core_start, kept[-1].core_end)
            if _overlaps(road, taken):
                continue
            out += [(AddressLabel.ROAD, road), (AddressLabel.HOUSE_NUMBER, house)]
            taken += [road, house]

    def parse(self, text: str) -> List[Tuple[AddressLabel, Tuple[int, int]]]:
        tokens = _tokenize(text)
        out: List[Tuple[AddressLabel, Tuple[int, int]]] = []
        taken: List[Tuple[int, int]] = []
        gaz = self.gazetteer
        street_line = not any(t.norm in gaz.stop_words for t in tokens)
        if street_line:
            self._lexicon_roads(text, taken, out)
        for label, entries in ((AddressLabel.COUNTRY, gaz.countries), (AddressLabel.CITY, gaz.cities),
                               (AddressLabel.SUBURB, gaz.districts)):
            for a, b in _phrase_hits(tokens, entries):
                span = (tokens[a].core_start, tokens[b].core_end)
                if not _overlaps(span, taken):
                    out.append((label, span))
                    taken.append(span)
        if street_line:
            self._numbered_roads(text, tokens, taken, out)
            for pattern in _POSTCODES:
                for match in pattern.finditer(text):
                    if not _overlaps(match.span(), taken):
                        out.append((AddressLabel.POSTCODE, match.span()))
                        taken.append(match.span())
        return sorted(out, key=lambda item: (item[1], item[0].rank))


def parse_address_parts(text: str, gaz: Gazetteer) -> List[Tuple[AddressLabel, Tuple[int, int]]]:
    return RuleAddressParser(gaz).parse(text)


def annotate_addresses(lines: Sequence[Union[Line, str]], parser: AddressParser) -> List[Annotation]:
    """Runs an address parser over block lines, one ADDRESS_PART annotation per part"""
    out = []
    for line_index, text in enumerate(_line_texts(lines)):
        for label, (start, end) in parser.parse(text):
            out.append(Annotation(AnnotationKind.ADDRESS_PART, label.value, (line_index, start, end),
                                  text[start:end], 1.0, f"address-{parser.name}"))
    return out


# ---------------------------------------------------------- ensemble -------

_ROAD_PARTS = {AddressLabel.ROAD.value, AddressLabel.HOUSE_NUMBER.value, AddressLabel.HOUSE.value}
_ENTITY_ITEMS = {"CITY": AddressLabel.CITY.value, "COUNTRY": AddressLabel.COUNTRY.value, "LOCATION": "location"}


def _address_item(label: str) -> str:
    return AddressLabel.ROAD.value if label in _ROAD_PARTS else label


def ensemble_locations(block: Block, ner_annots: Sequence[Annotation], addr_annots: Sequence[Annotation],
                       cfg: PipelineConfig) -> Block:
    """
    Merges entity and address annotations into the block.
    Conflicts on the same text: ORGANIZATION beats road and house parts,
    road beats PERSON. Address parts survive only when the block has at least
    min_address_items distinct address items counted over both sources
    (house numbers count with their road).
    """
    organizations = [a for a in ner_annots if a.label == "ORGANIZATION"]
    addresses = [a for a in addr_annots
                 if not (a.label in _ROAD_PARTS and any(a.overlaps(o) for o in organizations))]
    roads = [a for a in addresses if a.label == AddressLabel.ROAD.value]
    entities = [a for a in ner_annots if not (a.label == "PERSON" and any(a.overlaps(r) for r in roads))]

    items: Set[str] = {_address_item(a.label) for a in addresses}
    items |= {_ENTITY_ITEMS[a.label] for a in entities if a.label in _ENTITY_ITEMS}
    if len(items) < cfg.min_address_items:
        if addresses:
            logger.debug("Block %d: %d address item(s) below %d, address parts dropped",
                         block.id, len(items), cfg.min_address_items)
        addresses = []
    return replace(block, annotations=block.annotations + tuple(entities) + tuple(addresses))


# ---------------------------------------------------------- registry -------

_ENTITY_FACTORIES: Dict[str, Callable[[str, Optional[str]], EntityAnnotator]] = {}
_ADDRESS_FACTORIES: Dict[str, Callable[[str, Optional[str]], AddressParser]] = {}


def register_entity_annotator(name: str, factory: Callable[[str, Optional[str]], EntityAnnotator]):
    """Registers a factory (language, resource dir) -> EntityAnnotator under a config name"""
    _ENTITY_FACTORIES[name] = factory


def register_address_parser(name: str, factory: Callable[[str, Optional[str]], AddressParser]):
    _ADDRESS_FACTORIES[name] = factory


def make_entity_annotator(name: str, language: str, base: Union[str, Path, None] = None) -> EntityAnnotator:
    if name not in _ENTITY_FACTORIES:
        raise ConfigError(f"unknown entity annotator '{name}', known: {sorted(_ENTITY_FACTORIES)}")
    return _ENTITY_FACTORIES[name](language, None if base is None else str(base))


def make_address_parser(name: str, language: str, base: Union[str, Path, None] = None) -> AddressParser:
    if name not in _ADDRESS_FACTORIES:
        raise ConfigError(f"unknown address parser '{name}', known: {sorted(_ADDRESS_FACTORIES)}")
    return _ADDRESS_FACTORIES[name](language, None if base is None else str(base))


register_entity_annotator("gazetteer", lambda lang, base: GazetteerEntityAnnotator(load_gazetteer(lang, base)))
register_address_parser("rules", lambda lang, base: RuleAddressParser(load_gazetteer(lang, base)))
