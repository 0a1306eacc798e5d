# -*- coding: utf-8-*-
import numpy as np
import pytest

# Local imports
from conftest import make_block
from InvoiceReader.DocModel import Page, ZoneV
from InvoiceReader.Errors import ConfigError, DegenerateDataError, SchemaError, SchemaMismatchError, StageError
from InvoiceReader.PageClassifier import (
    GROUP_ANNOTATIONS,
    GROUP_TITLE_PAGE,
    GROUP_WORDS,
    KIND_LOGISTIC_REGRESSION,
    KIND_NAIVE_BAYES,
    STAGE_LAYOUT_ONLY,
    STAGE_WITH_ANNOTATIONS,
    ClassifierModel,
    FeatureSchema,
    FeatureVector,
    cross_validate,
    extract_features,
    find_page_number,
    find_title_block,
    fit_logistic_regression,
    load_vocabulary,
    logistic_loss_and_gradient,
    predict,
    predict_proba,
    train,
    word_tokens,
)

WORDS_ONLY = FeatureSchema(("invoice", "continued", "total"), (GROUP_WORDS,))


def _separable(n=10):
    dataset = []
    for i in range(n):
        dataset.append((FeatureVector(WORDS_ONLY, [1.0, 0.0, float(i % 2)]), 1))
        dataset.append((FeatureVector(WORDS_ONLY, [0.0, 1.0, float(i % 2)]), 0))
    return dataset


def _page(*blocks):
    return Page(1, 1240, 1754, tuple(blocks))


def test_word_tokens():
    assert word_tokens("Faktura - daňový doklad č. 2024/01") == ["faktura", "daňový", "doklad", "č"]


def test_load_vocabulary(tmp_path):
    path = tmp_path / "vocab.txt"
    path.write_text("# frequent words\nInvoice\n\ntotal\n", encoding="utf-8")
    assert load_vocabulary(path) == ("invoice", "total")
    with pytest.raises(ConfigError):
        load_vocabulary(tmp_path / "missing.txt")


@pytest.mark.parametrize("text,expected", [
    ("Page 2 of 3", 2),
    ("Strana 1", 1),
    ("Continued 2/4", 2),
    ("Total 1 250,00", None),
])
def test_find_page_number(text, expected):
    assert find_page_number(_page(make_block(0, [text]))) == expected


def test_title_is_the_largest_single_line_header_block():
    title = make_block(0, ["INVOICE"], top=50, height=40, zone_v=ZoneV.HEADER)
    number = make_block(1, ["No. 2024-001"], left=700, top=50, zone_v=ZoneV.HEADER)
    body = make_block(2, ["Line one"], top=400, height=60, zone_v=ZoneV.MIDDLE)
    assert find_title_block(_page(title, number, body)).id == 0
    plain = make_block(0, ["Invoice"], top=50, zone_v=ZoneV.HEADER)
    assert find_title_block(_page(plain, body)).id == 0


def test_two_line_header_block_is_no_title():
    header = make_block(0, ["Invoice", "No. 2024-001"], top=50, zone_v=ZoneV.HEADER)
    body = make_block(1, ["Line one"], top=400, zone_v=ZoneV.MIDDLE)
    assert find_title_block(_page(header, body)) is None
    fv = extract_features(_page(header, body), ("invoice",), STAGE_LAYOUT_ONLY)
    assert fv["title_present"] == 0.0


def test_layout_features():
    title = make_block(0, ["INVOICE"], top=50, height=40, zone_v=ZoneV.HEADER)
    body = make_block(1, ["Page 1 of 2", "Total due"], top=400, zone_v=ZoneV.MIDDLE)
    fv = extract_features(_page(title, body), ("invoice", "continued"), STAGE_LAYOUT_ONLY)
    assert fv["invoice"] == 1.0
    assert fv["continued"] == 0.0
    assert (fv["title_present"], fv["title_top"], fv["title_height"]) == (1.0, 50.0, 40.0)
    assert fv["page_number"] == 1.0


def test_annotation_features_need_annotations():
    page = _page(make_block(0, ["Invoice"]))
    with pytest.raises(StageError):
        extract_features(page, ("invoice",), STAGE_WITH_ANNOTATIONS)
    with pytest.raises(ConfigError):
        extract_features(page, ("invoice",), STAGE_LAYOUT_ONLY, groups=(GROUP_ANNOTATIONS,))


def test_schema_hash_follows_vocabulary_and_groups():
    assert FeatureSchema(("a",), (GROUP_WORDS,)).hash == FeatureSchema(("A",), (GROUP_WORDS,)).hash
    assert FeatureSchema(("a",), (GROUP_WORDS,)).hash != FeatureSchema(("b",), (GROUP_WORDS,)).hash
    assert FeatureSchema(("a",), (GROUP_WORDS,)).hash != FeatureSchema(("a",), (GROUP_WORDS, GROUP_TITLE_PAGE)).hash
    with pytest.raises(SchemaMismatchError):
        FeatureVector(WORDS_ONLY, [1.0, 0.0])


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 5))
    y = (rng.random(30) > 0.5).astype(float)
    w, b, l2, eps = rng.normal(size=5), 0.3, 0.1, 1e-6
    _, grad_w, grad_b = logistic_loss_and_gradient(w, b, X, y, l2)
    numeric = np.zeros(6)
    for j in range(5):
        step = np.zeros(5)
        step[j] = eps
        numeric[j] = (logistic_loss_and_gradient(w + step, b, X, y, l2)[0]
                      - logistic_loss_and_gradient(w - step, b, X, y, l2)[0]) / (2 * eps)
    numeric[5] = (logistic_loss_and_gradient(w, b + eps, X, y, l2)[0]
                  - logistic_loss_and_gradient(w, b - eps, X, y, l2)[0]) / (2 * eps)
    analytic = np.append(grad_w, grad_b)
    error = np.linalg.norm(numeric - analytic) / max(np.linalg.norm(numeric) + np.linalg.norm(analytic), 1e-12)
    assert error < 1e-4


def test_loss_history_never_increases(cfg):
    rng = np.random.default_rng(5)
    X = rng.normal(size=(40, 3))
    y = (X[:, 0] + 0.5 * rng.normal(size=40) > 0).astype(float)
    _, _, history = fit_logistic_regression(X, y, cfg.with_overrides(lr_max_iterations=200))
    assert len(history) > 1
    assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))


def test_naive_bayes_posterior_matches_hand_computation(cfg):
    rng = np.random.default_rng(11)
    rows = (rng.random((24, 3)) > 0.5).astype(float)
    labels = [int(r[0]) if i % 5 else 1 - int(r[0]) for i, r in enumerate(rows)]
    model = train([(FeatureVector(WORDS_ONLY, r), c) for r, c in zip(rows, labels)], KIND_NAIVE_BAYES, cfg)
    X, y, alpha = rows, np.array(labels), cfg.nb_alpha
    joint = []
    for c in (0, 1):
        p1 = (X[y == c].sum(axis=0) + alpha) / (np.sum(y == c) + 2 * alpha)
        prior = np.log(np.mean(y == c))
        joint.append(prior + X @ np.log(p1) + (1 - X) @ np.log(1 - p1))
    evidence = np.exp(joint[0]) + np.exp(joint[1])
    proba = predict_proba(model, X)
    np.testing.assert_allclose(proba, np.exp(joint[1]) / evidence, atol=1e-9)
    np.testing.assert_allclose(proba + np.exp(joint[0]) / evidence, 1.0, atol=1e-9)


@pytest.mark.parametrize("kind", [KIND_NAIVE_BAYES, KIND_LOGISTIC_REGRESSION])
def test_separable_data_is_learned(kind, cfg):
    precision, recall, f1 = cross_validate(_separable(), kind, 10, cfg)
    assert (precision, recall, f1) == (1.0, 1.0, 1.0)


@pytest.mark.parametrize("kind", [KIND_NAIVE_BAYES, KIND_LOGISTIC_REGRESSION])
def test_model_json_roundtrip(kind, cfg):
    model = train(_separable(), kind, cfg)
    again = ClassifierModel.from_json(model.to_json())
    X = np.vstack([fv.values for fv, _ in _separable()])
    np.testing.assert_allclose(predict_proba(again, X), predict_proba(model, X))
    assert predict(again, FeatureVector(WORDS_ONLY, [1.0, 0.0, 0.0]))[0] == 1


def test_numeric_features_are_binned(cfg):
    schema = FeatureSchema((), (GROUP_TITLE_PAGE,))
    dataset = [(FeatureVector(schema, [1.0, 50.0 + i, 40.0, 1.0, 1.0]), 1) for i in range(6)]
    dataset += [(FeatureVector(schema, [0.0, 0.0, 0.0, 1.0, 2.0 + i % 2]), 0) for i in range(6)]
    model = train(dataset, KIND_NAIVE_BAYES, cfg)
    label, probability = predict(model, dataset[0][0])
    assert label == 1
    assert 0.5 < probability <= 1.0


def test_training_errors(cfg):
    with pytest.raises(DegenerateDataError):
        train([], KIND_NAIVE_BAYES, cfg)
    with pytest.raises(DegenerateDataError):
        train([(fv, 1) for fv, _ in _separable()], KIND_LOGISTIC_REGRESSION, cfg)
    with pytest.raises(ConfigError):
        train(_separable(), "SVM", cfg)
    with pytest.raises(DegenerateDataError):
        cross_validate(_separable(2), KIND_NAIVE_BAYES, 10, cfg)


def test_schema_mismatch(cfg):
    model = train(_separable(), KIND_NAIVE_BAYES, cfg)
    other = FeatureSchema(("invoice", "continued", "subtotal"), (GROUP_WORDS,))
    with pytest.raises(SchemaMismatchError):
        predict(model, FeatureVector(other, [1.0, 0.0, 0.0]))


def test_model_loading_errors(cfg):
    data = train(_separable(), KIND_NAIVE_BAYES, cfg).to_json().decode("utf-8")
    with pytest.raises(SchemaMismatchError):
        ClassifierModel.from_json(data.replace("continued", "continue"))
    with pytest.raises(SchemaError):
        ClassifierModel.from_json(data.replace(KIND_NAIVE_BAYES, "SVM"))
    with pytest.raises(SchemaError):
        ClassifierModel.from_json(b"{}")
