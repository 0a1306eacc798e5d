# -*- coding: utf-8-*-
"""
Module : Corpus_Maker
Author : InvoiceReader team
Description :
    Builds synthetic invoice pages from layout templates.
    A template is a JSON file listing text blocks (position, font height and
    lines with {placeholders}) plus the gold items the page carries.
    Words get the geometry a simple OCR engine would report for a
    monospaced rendering of the text.
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

# Local imports
from InvoiceReader.DocModel import BBox, FieldLabel, Role, WordBox
from InvoiceReader.Errors import ConfigError, SchemaError
from InvoiceReader.OCRIngest import OCRPage
from InvoiceReader.PipelineConfig import PACKAGE_DIR

__all__ = [
    "CORPUS_DIR",
    "TemplateBlock",
    "InvoiceTemplate",
    "load_template",
    "load_templates",
    "load_value_pool",
    "make_invoice_values",
    "Corpus_Maker",
]

logger = logging.getLogger(__name__)

CORPUS_DIR = PACKAGE_DIR / "corpus"


@dataclass(frozen=True)
class TemplateBlock:
    left: int
    top: int
    font: int
    lines: Tuple[str, ...]


@dataclass(frozen=True)
class InvoiceTemplate:
    """
    InvoiceTemplate : one first-page layout and its continuation page.
    gold : (field, role, value pattern) triples filled from the invoice values
    """

    name: str
    language: str
    width: int
    height: int
    blocks: Tuple[TemplateBlock, ...]
    continuation: Tuple[TemplateBlock, ...]
    gold: Tuple[Tuple[FieldLabel, Role, str], ...]


def _blocks(items, path: str) -> Tuple[TemplateBlock, ...]:
    out = []
    for i, item in enumerate(items):
        try:
            block = TemplateBlock(int(item["x"]), int(item["y"]), int(item["font"]), tuple(item["lines"]))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad template block: {e}", f"{path}[{i}]") from e
        if block.font <= 0 or not block.lines:
            raise SchemaError("template block needs a positive font and at least one line", f"{path}[{i}]")
        out.append(block)
    return tuple(out)


def load_template(path: Union[str, Path]) -> InvoiceTemplate:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read template {path}: {e}") from e
    try:
        gold = tuple((FieldLabel(g["field"]), Role(g["role"]), g["value"]) for g in data.get("gold", ()))
        return InvoiceTemplate(
            data["name"], data["language"], int(data["width"]), int(data["height"]),
            _blocks(data["blocks"], "blocks"), _blocks(data.get("continuation", ()), "continuation"), gold,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad template {path.name}: {e}") from e


def load_templates(names: Optional[Sequence[str]] = None, base: Union[str, Path, None] = None
                   ) -> List[InvoiceTemplate]:
    """Templates under <base>/templates sorted by file name, optionally only the named ones"""
    folder = Path(base) / "templates" if base is not None else CORPUS_DIR / "templates"
    templates = [load_template(p) for p in sorted(folder.glob("*.json"))]
    if names:
        wanted = set(names)
        templates = [t for t in templates if t.name in wanted]
    return templates


def load_value_pool(language: str, base: Union[str, Path, None] = None) -> dict:
    path = (Path(base) if base is not None else CORPUS_DIR) / "values" / f"{language}.json"
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read value pool {path}: {e}") from e


# ------------------------------------------------------------- values ------

def _pick(rng: np.random.Generator, items: Sequence):
    return items[int(rng.integers(len(items)))]


def _company_id(rng: np.random.Generator) -> str:
    digits = [int(d) for d in rng.integers(0, 10, size=7)]
    total = sum(d * w for d, w in zip(digits, range(8, 1, -1)))
    return "".join(map(str, digits)) + str((11 - total % 11) % 10)


def _iban(country: str, bank: str, length: int, rng: np.random.Generator) -> str:
    bban = bank + "".join(str(int(d)) for d in rng.integers(0, 10, size=length - 4 - len(bank)))
    numeric = "".join(str(int(c, 36)) for c in bban + country + "00")
    return f"{country}{98 - int(numeric) % 97:02d}{bban}"


def _price(cents: int, pool: Mapping) -> str:
    text = f"{cents / 100:,.2f}"
    if pool["decimal_comma"]:
        text = text.replace(",", " ").replace(".", ",")
    return f"{text} {pool['currency']}"


def _date(rng: np.random.Generator, pool: Mapping) -> str:
    return pool["date_format"].format(day=int(rng.integers(1, 29)), month=int(rng.integers(1, 13)), year=2024)


def _party(prefix: str, company: Mapping, rng: np.random.Generator, pool: Mapping) -> Dict[str, str]:
    city, postcode = _pick(rng, pool["cities"])
    company_id = _company_id(rng)
    if pool["vat_from_company_id"]:
        vat = pool["vat_prefix"] + company_id
    else:
        vat = pool["vat_prefix"] + "".join(str(int(d)) for d in rng.integers(0, 10, size=9))
    party = {
        "name": company["name"],
        "street": _pick(rng, pool["streets"]),
        "city_line": pool["city_line_format"].format(city=city, postcode=postcode),
        "country": pool["country"],
        "vat": vat,
        "company_id": company_id,
        "email": f"info@{company['slug']}{pool['domain']}",
        "website": f"www.{company['slug']}{pool['domain']}",
        "phone": pool["phone_format"].format(*(int(v) for v in rng.integers(100, 1000, size=3)),
                                             long=int(rng.integers(1000, 10000)), last=int(rng.integers(1000, 10000))),
        "contact": _pick(rng, pool["contacts"]),
    }
    party["address"] = f"{party['street']}, {party['city_line']}, {party['country']}"
    return {f"{prefix}_{key}": value for key, value in party.items()}


def make_invoice_values(pool: Mapping, rng: np.random.Generator) -> Dict[str, str]:
    """Draws one invoice's field values from a language value pool"""
    values: Dict[str, str] = {
        "invoice_number": pool["invoice_format"].format(seq=int(rng.integers(1, 10000))),
        "order_number": pool["order_format"].format(seq=int(rng.integers(10000, 100000))),
        "invoice_date": _date(rng, pool),
        "due_date": _date(rng, pool),
        "payment_date": _date(rng, pool),
        "total": _price(int(rng.integers(10000, 5000000)), pool),
        "paid": _price(int(rng.integers(0, 10000)), pool),
        "payment_method": _pick(rng, pool["payment_methods"]),
        "swift": _pick(rng, pool["swift"]),
    }
    iban = pool["iban"]
    bank = _pick(rng, iban["banks"])
    values["iban"] = _iban(iban["country"], bank, iban["length"], rng)
    values["account"] = f"{int(rng.integers(100000, 1000000000))}/{bank}"
    companies = pool["companies"]
    order = rng.permutation(len(companies))
    for prefix, index in zip(("seller", "buyer", "delivery"), order):
        values.update(_party(prefix, companies[int(index)], rng, pool))
    values["items"] = [pool["item_format"].format(item=_pick(rng, pool["items"]), qty=int(rng.integers(1, 10)),
                                                  price=_price(int(rng.integers(1000, 99900)), pool))
                       for _ in range(4)]
    return values


# -------------------------------------------------------------- pages ------

class Corpus_Maker:
    """
    Corpus_Maker : lays out one template as OCR word boxes.
    charWidth and spaceWidth are fractions of the font height.
    """

    def __init__(self, template: InvoiceTemplate, charWidth: float = 0.55, spaceWidth: float = 0.35,
                 linePitch: float = 1.4, corrupt: Optional[Callable[[str], str]] = None):
        #Init passed variables
        self.template = template
        self.charWidth = charWidth
        self.spaceWidth = spaceWidth
        self.linePitch = linePitch
        #Word corruption hook, identity when None
        self.corrupt = corrupt

    def _line_words(self, text: str, left: int, top: int, font: int) -> List[WordBox]:
        words = []
        x = left
        for token in text.split():
            width = max(1, round(len(token) * self.charWidth * font))
            noisy = self.corrupt(token) if self.corrupt is not None else token
            words.append(WordBox(noisy, BBox(x, top, width, font), 0.95, font))
            x += width + max(1, round(self.spaceWidth * font))
        return words

    def _render(self, blocks: Sequence[TemplateBlock], values: Mapping) -> List[WordBox]:
        words: List[WordBox] = []
        for block in blocks:
            lines: List[str] = []
            for line in block.lines:
                if line == "{items}":
                    lines.extend(values["items"])
                    continue
                try:
                    lines.append(line.format_map(values))
                except KeyError as e:
                    raise ConfigError(f"template {self.template.name}: unknown placeholder {e}") from e
            for i, text in enumerate(lines):
                top = block.top + round(i * self.linePitch * block.font)
                words.extend(self._line_words(text, block.left, top, block.font))
        for word in words:
            if word.bbox.right > self.template.width or word.bbox.bottom > self.template.height:
                raise ConfigError(f"template {self.template.name}: word {word.text!r} runs off the page")
        return words

    def create(self, values: Mapping, pages: int = 1) -> List[OCRPage]:
        """Renders the first page and pages - 1 continuation pages"""
        if pages > 1 and not self.template.continuation:
            raise ConfigError(f"template {self.template.name} has no continuation page")
        out = []
        for number in range(1, pages + 1):
            page_values = dict(values, page=f"{number}/{pages}")
            blocks = self.template.blocks if number == 1 else self.template.continuation
            out.append(OCRPage(number, self.template.width, self.template.height,
                               tuple(self._render(blocks, page_values))))
        return out

    def gold(self, values: Mapping, pages: int = 1) -> List[Tuple[FieldLabel, Role, str]]:
        page_values = dict(values, page=f"1/{pages}")
        return [(field, role, pattern.format_map(page_values)) for field, role, pattern in self.template.gold]
