# -*- coding: utf-8-*-
import pytest

# Local imports
from conftest import make_block
from InvoiceReader.DocModel import AnnotationKind
from InvoiceReader.EntityAnnotator import (
    AddressLabel,
    Gazetteer,
    RuleAddressParser,
    annotate_addresses,
    ensemble_locations,
    gazetteer_annotate,
    load_gazetteer,
    make_address_parser,
    make_entity_annotator,
    normalize,
    parse_address_parts,
)
from InvoiceReader.Errors import ConfigError


@pytest.fixture(scope="module")
def gaz():
    return Gazetteer.from_lists(
        "en",
        first_names=["Jane"],
        cities=["London", "Newcastle upon Tyne", "Plzeň"],
        countries=["United Kingdom"],
        legal_forms=["Ltd", "s.r.o."],
        street_suffixes=["Street", "St"],
        stop_words=["tel"],
    )


def _labels(annotations):
    return [(a.label, a.matched_text) for a in annotations]


def test_normalize_drops_case_and_diacritics():
    assert normalize("PLZEŇ") == "plzen"


def test_organization_ends_in_legal_form(gaz):
    assert _labels(gazetteer_annotate(["Acme Trading Ltd"], gaz)) == [("ORGANIZATION", "Acme Trading Ltd")]


def test_organization_stops_at_caption(gaz):
    found = _labels(gazetteer_annotate(["Supplier: Novák s.r.o."], gaz))
    assert found == [("ORGANIZATION", "Novák s.r.o.")]


def test_person_and_places(gaz):
    found = _labels(gazetteer_annotate(["Jane Smith", "Newcastle upon Tyne, United Kingdom"], gaz))
    assert ("PERSON", "Jane Smith") in found
    assert ("CITY", "Newcastle upon Tyne") in found
    assert ("COUNTRY", "United Kingdom") in found


def test_uppercase_text_gives_same_spans(gaz):
    lines = ["Acme Trading Ltd", "Jane Smith", "Plzeň"]
    lower = gazetteer_annotate(lines, gaz)
    upper = gazetteer_annotate([line.upper() for line in lines], gaz)
    assert [(a.label, a.span) for a in lower] == [(a.label, a.span) for a in upper]


def test_street_with_house_number(gaz):
    parts = RuleAddressParser(gaz).parse("12 High Street")
    assert parts == [(AddressLabel.HOUSE_NUMBER, (0, 2)), (AddressLabel.ROAD, (3, 14))]
    assert parse_address_parts("12 High Street", gaz) == parts


def test_stop_word_line_has_no_street(gaz):
    labels = {label for label, _ in parse_address_parts("Tel 12 High Street", gaz)}
    assert AddressLabel.ROAD not in labels
    assert parse_address_parts("Tel London", gaz) == [(AddressLabel.CITY, (4, 10))]


def test_city_and_uk_postcode(gaz):
    labels = {label for label, _ in RuleAddressParser(gaz).parse("London EC1A 1BB")}
    assert labels == {AddressLabel.CITY, AddressLabel.POSTCODE}


def test_ensemble_keeps_address_with_enough_items(gaz, cfg):
    block = make_block(0, ["Acme Trading Ltd", "12 High Street", "London EC1A 1BB"])
    merged = ensemble_locations(block, gazetteer_annotate(block.lines, gaz),
                                annotate_addresses(block.lines, RuleAddressParser(gaz)), cfg)
    assert "ORGANIZATION" in merged.labels(AnnotationKind.ENTITY)
    assert {"road", "house_number", "postcode", "city"} <= merged.labels(AnnotationKind.ADDRESS_PART)


def test_ensemble_drops_lonely_address_part(gaz, cfg):
    block = make_block(0, ["Parcel 11000"])
    addresses = annotate_addresses(block.lines, RuleAddressParser(gaz))
    assert addresses
    merged = ensemble_locations(block, gazetteer_annotate(block.lines, gaz), addresses, cfg)
    assert not merged.annotations_of(AnnotationKind.ADDRESS_PART)


def test_road_beats_person(gaz, cfg):
    block = make_block(0, ["12 Jane Street", "London"])
    ner = gazetteer_annotate(block.lines, gaz)
    assert "PERSON" in {a.label for a in ner}
    merged = ensemble_locations(block, ner, annotate_addresses(block.lines, RuleAddressParser(gaz)), cfg)
    assert "PERSON" not in merged.labels(AnnotationKind.ENTITY)
    assert "road" in merged.labels(AnnotationKind.ADDRESS_PART)


def test_shipped_gazetteers_load():
    en = load_gazetteer("en")
    cs = load_gazetteer("cs")
    assert en.is_first_name("James")
    assert ("praha",) in cs.cities
    assert ("s.r.o",) in cs.legal_forms


def test_registry():
    assert make_entity_annotator("gazetteer", "en").name == "gazetteer"
    assert make_address_parser("rules", "cs").name == "rules"
    with pytest.raises(ConfigError):
        make_entity_annotator("transformer", "en")
    with pytest.raises(ConfigError):
        load_gazetteer("xx")
