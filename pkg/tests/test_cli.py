# -*- coding: utf-8-*-
import json

# Local imports
from InvoiceReader.InvoiceReaderCLI import EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, main

TSV = (
    "level\tpage_num\tblock_num\tpar_num\tline_num\tword_num\tleft\ttop\twidth\theight\tconf\ttext\n"
    "1\t1\t0\t0\t0\t0\t0\t0\t1240\t1754\t-1\t\n"
    "5\t1\t1\t1\t1\t1\t100\t100\t90\t20\t96\tInvoice\n"
    "5\t1\t1\t1\t1\t2\t200\t100\t80\t20\t95\tnumber:\n"
    "5\t1\t1\t1\t1\t3\t290\t100\t80\t20\t93\t2024-001\n"
)


def test_missing_required_option(tmp_path, capsys):
    assert main(["gen-corpus", "-n", "1"]) == EXIT_USAGE
    assert "--out" in capsys.readouterr().err


def test_unknown_command():
    assert main(["paint"]) == EXIT_USAGE


def test_gen_corpus_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["gen-corpus", "-n", "3", "--seed", "7", "--char-noise", "0.02", "--out",
                     str(tmp_path / name)]) == EXIT_OK
    for path in sorted((tmp_path / "a").rglob("*")):
        if path.is_file():
            assert path.read_bytes() == (tmp_path / "b" / path.relative_to(tmp_path / "a")).read_bytes()


def test_gen_corpus_unknown_template(tmp_path):
    assert main(["gen-corpus", "--templates", "nope", "--out", str(tmp_path)]) == EXIT_USAGE


def test_bad_noise_is_a_usage_error(tmp_path):
    assert main(["gen-corpus", "--char-noise", "3", "--out", str(tmp_path)]) == EXIT_USAGE


def test_analyze_then_extract(tmp_path):
    (tmp_path / "inv.tsv").write_text(TSV, encoding="utf-8")
    (tmp_path / "broken.tsv").write_text("not a tsv\n", encoding="utf-8")
    docs = tmp_path / "docs"
    assert main(["analyze", str(tmp_path / "inv.tsv"), "--out", str(docs)]) == EXIT_OK
    assert main(["analyze", str(tmp_path / "inv.tsv"), str(tmp_path / "broken.tsv"),
                 "--out", str(docs)]) == EXIT_PARTIAL
    assert (docs / "inv.json").is_file()
    out = tmp_path / "reports.json"
    assert main(["extract", str(docs / "inv.json"), "--lang", "en", "--regex", "--out", str(out)]) == EXIT_OK
    reports = json.loads(out.read_text(encoding="utf-8"))
    assert reports[0]["source_id"] == "inv"
    assert reports[0]["matcher"] == "REGEX"


def test_extract_unknown_language(tmp_path):
    assert main(["extract", "--lang", "xx", "--out", str(tmp_path / "r.json")]) == EXIT_USAGE


def test_evaluate_needs_inputs():
    assert main(["evaluate"]) == EXIT_USAGE


def test_evaluate_missing_report(tmp_path):
    gold = tmp_path / "gold.jsonl"
    gold.write_text('{"source_id": "inv-9", "items": [{"field": "IBAN", "role": "NONE", "value": "x"}]}\n',
                    encoding="utf-8")
    reports = tmp_path / "reports.json"
    reports.write_text("[]", encoding="utf-8")
    assert main(["evaluate", "--gold", str(gold), "--reports", str(reports)]) == EXIT_PARTIAL


def test_first_page_classifier_round_trip(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    assert main(["gen-corpus", "-n", "20", "--seed", "3", "--continuation-ratio", "1.0",
                 "--out", str(corpus)]) == EXIT_OK
    model = tmp_path / "first_page.json"
    capsys.readouterr()
    assert main(["train-classifier", "--corpus", str(corpus), "--features", "WORDS,TITLE_PAGE",
                 "--cv", "10", "--out", str(model)]) == EXIT_OK
    scores = dict(item.split("=") for item in capsys.readouterr().out.split())
    assert float(scores["f1"]) >= 0.9
    docs = tmp_path / "docs"
    inputs = [str(p) for p in sorted((corpus / "docs").glob("*.json"))]
    assert main(["analyze", *inputs, "--format", "json", "--out", str(docs)]) == EXIT_OK
    out = tmp_path / "first_pages.json"
    assert main(["classify-page", *[str(p) for p in sorted(docs.glob("*.json"))],
                 "--model", str(model), "--out", str(out)]) == EXIT_OK
    predicted = {(r["source_id"], r["page"]): r["first_page"] for r in json.loads(out.read_text(encoding="utf-8"))}
    gold = [json.loads(line) for line in (corpus / "pages.jsonl").read_text(encoding="utf-8").splitlines()]
    assert len(predicted) == len(gold)
    agree = sum(predicted[(g["source_id"], g["page"])] == g["first_page"] for g in gold)
    assert agree >= 0.9 * len(gold)
