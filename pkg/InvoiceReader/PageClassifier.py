# -*- coding: utf-8-*-
"""
Module : PageClassifier
Author : InvoiceReader team
Description :
    Decides whether a page is the first page of an invoice.
    Features come from the page layout (frequent words, title, page number)
    and optionally from annotations (keywords, data types, block types).
    Two classifiers written on numpy: Bernoulli Naive Bayes with Laplace
    smoothing and L2-regularized Logistic Regression fitted by gradient
    descent with backtracking. Includes stratified k-fold cross validation.
"""
import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

# Local imports
from InvoiceReader.DocModel import AnnotationKind, BlockType, Page, ZoneV
from InvoiceReader.EntityAnnotator import ENTITY_LABELS
from InvoiceReader.Errors import ConfigError, DegenerateDataError, SchemaError, SchemaMismatchError, StageError
from InvoiceReader.PipelineConfig import PipelineConfig
from InvoiceReader.TextAnnotator import DATA_LABELS, KEYWORD_LABELS

__all__ = [
    "STAGE_LAYOUT_ONLY",
    "STAGE_WITH_ANNOTATIONS",
    "GROUP_WORDS",
    "GROUP_TITLE_PAGE",
    "GROUP_ANNOTATIONS",
    "KIND_NAIVE_BAYES",
    "KIND_LOGISTIC_REGRESSION",
    "FeatureSchema",
    "FeatureVector",
    "ClassifierModel",
    "load_vocabulary",
    "word_tokens",
    "extract_features",
    "find_title_block",
    "find_page_number",
    "logistic_loss_and_gradient",
    "fit_logistic_regression",
    "train",
    "predict",
    "predict_proba",
    "cross_validate",
]

logger = logging.getLogger(__name__)

STAGE_LAYOUT_ONLY = "LAYOUT_ONLY"
STAGE_WITH_ANNOTATIONS = "WITH_ANNOTATIONS"
GROUP_WORDS = "WORDS"
GROUP_TITLE_PAGE = "TITLE_PAGE"
GROUP_ANNOTATIONS = "ANNOTATIONS"
_GROUP_ORDER = (GROUP_WORDS, GROUP_TITLE_PAGE, GROUP_ANNOTATIONS)
_STAGE_GROUPS = {
    STAGE_LAYOUT_ONLY: (GROUP_WORDS, GROUP_TITLE_PAGE),
    STAGE_WITH_ANNOTATIONS: _GROUP_ORDER,
}
KIND_NAIVE_BAYES = "NAIVE_BAYES"
KIND_LOGISTIC_REGRESSION = "LOGISTIC_REGRESSION"

NUMERIC_FEATURES = ("title_top", "title_height", "page_number")
_TITLE_FEATURES = ("title_present", "title_top", "title_height", "page_number_present", "page_number")
_NB_BINS = 4
_WORD = re.compile(r"[^\W\d_]+(?:[-'][^\W\d_]+)*")
_PAGE_WORD = re.compile(r"(?i)\b(?:page|strana|str\.)\s*(\d{1,3})\b")
_PAGE_FRACTION = re.compile(r"(?<![\d/.,])(\d{1,3})\s*/\s*(\d{1,3})(?![\d/.,])")


@dataclass(frozen=True)
class FeatureSchema:
    """
    FeatureSchema : names of the vector dimensions.
    The hash covers the vocabulary and the feature groups, so a model only
    accepts vectors built the same way.
    """

    vocabulary: Tuple[str, ...]
    groups: Tuple[str, ...] = _GROUP_ORDER
    names: Tuple[str, ...] = field(init=False)
    hash: str = field(init=False)

    def __post_init__(self):
        unknown = set(self.groups) - set(_GROUP_ORDER)
        if unknown or not self.groups:
            raise ConfigError(f"feature groups must be a non-empty subset of {_GROUP_ORDER}, got {self.groups}")
        vocabulary = tuple(dict.fromkeys(w.casefold() for w in self.vocabulary))
        groups = tuple(g for g in _GROUP_ORDER if g in self.groups)
        names: List[str] = []
        if GROUP_WORDS in groups:
            names.extend(vocabulary)
        if GROUP_TITLE_PAGE in groups:
            names.extend(_TITLE_FEATURES)
        if GROUP_ANNOTATIONS in groups:
            names.extend(f"K_{label}" for label in sorted(KEYWORD_LABELS))
            names.extend(f"D_{label}" for label in sorted(DATA_LABELS | set(ENTITY_LABELS)))
            names.extend(t.value.lower().replace("_", " ") for t in BlockType if t != BlockType.EMPTY)
        digest = hashlib.sha256(json.dumps({"groups": groups, "names": names}).encode("utf-8")).hexdigest()
        object.__setattr__(self, "vocabulary", vocabulary)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "names", tuple(names))
        object.__setattr__(self, "hash", digest)

    @property
    def numeric_mask(self) -> np.ndarray:
        return np.array([n in NUMERIC_FEATURES for n in self.names], dtype=bool)

    def to_dict(self) -> dict:
        return {"vocabulary": list(self.vocabulary), "groups": list(self.groups), "hash": self.hash}

    @classmethod
    def from_dict(cls, data: Mapping) -> "FeatureSchema":
        schema = cls(tuple(data["vocabulary"]), tuple(data["groups"]))
        if "hash" in data and data["hash"] != schema.hash:
            raise SchemaMismatchError("stored feature schema hash does not match its vocabulary and groups")
        return schema


@dataclass(frozen=True, eq=False)
class FeatureVector:
    schema: FeatureSchema
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.schema.names),):
            raise SchemaMismatchError(f"vector has {values.shape} values for {len(self.schema.names)} features")
        object.__setattr__(self, "values", values)

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.schema.names.index(name)])

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.schema.names, self.values.tolist()))


def word_tokens(text: str) -> List[str]:
    """Casefolded alphabetic words, the units of the frequent-word features"""
    return [w.casefold() for w in _WORD.findall(text)]


def load_vocabulary(path: Union[str, Path]) -> Tuple[str, ...]:
    """One word per line; blank lines and '#' comments are skipped"""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read vocabulary {path}: {e}") from e
    return tuple(w.strip().casefold() for w in lines if w.strip() and not w.lstrip().startswith("#"))


# ------------------------------------------------------------ features -----

def find_title_block(page: Page):
    """Largest-font single-line block in the header or top zone"""
    candidates = [b for b in page.blocks if len(b.lines) == 1 and b.zone_v in (ZoneV.HEADER, ZoneV.TOP)]
    if not candidates:
        return None
    return min(candidates, key=lambda b: (-b.lines[0].font_height, b.bbox.top, b.id))


def find_page_number(page: Page) -> Optional[int]:
    """Number after a page word, else the N of an "N/M" fraction"""
    text = page.text
    match = _PAGE_WORD.search(text) or _PAGE_FRACTION.search(text)
    return int(match.group(1)) if match else None


def _check_annotated(page: Page):
    if page.blocks and all(not b.block_types for b in page.blocks):
        raise StageError(f"page {page.number} has no annotations or block types yet")


def extract_features(page: Page, vocab: Iterable[str], stage: str = STAGE_WITH_ANNOTATIONS,
                     groups: Optional[Sequence[str]] = None) -> FeatureVector:
    """
    Feature vector of one page. groups defaults to everything the stage
    allows; annotation features need the annotation stage.
    """
    if stage not in _STAGE_GROUPS:
        raise ConfigError(f"unknown feature stage {stage!r}")
    groups = tuple(groups or _STAGE_GROUPS[stage])
    if GROUP_ANNOTATIONS in groups:
        if stage != STAGE_WITH_ANNOTATIONS:
            raise ConfigError("annotation features need the WITH_ANNOTATIONS stage")
        _check_annotated(page)
    schema = FeatureSchema(tuple(vocab), groups)
    values: Dict[str, float] = {}
    if GROUP_WORDS in schema.groups:
        words = set(word_tokens(page.text))
        values.update({w: float(w in words) for w in schema.vocabulary})
    if GROUP_TITLE_PAGE in schema.groups:
        title = find_title_block(page)
        number = find_page_number(page)
        values.update({
            "title_present": float(title is not None),
            "title_top": float(title.bbox.top) if title else 0.0,
            "title_height": float(title.bbox.height) if title else 0.0,
            "page_number_present": float(number is not None),
            "page_number": float(number or 0),
        })
    if GROUP_ANNOTATIONS in schema.groups:
        keywords = set().union(*(b.labels(AnnotationKind.KEYWORD) for b in page.blocks))
        data = set().union(*(b.labels(AnnotationKind.DATATYPE, AnnotationKind.ENTITY) for b in page.blocks))
        types = set().union(*(b.block_types for b in page.blocks))
        for name in schema.names:
            if name.startswith("K_"):
                values[name] = float(name[2:] in keywords)
            elif name.startswith("D_"):
                values[name] = float(name[2:] in data)
        for block_type in BlockType:
            if block_type != BlockType.EMPTY:
                values[block_type.value.lower().replace("_", " ")] = float(block_type in types)
    return FeatureVector(schema, np.array([values[n] for n in schema.names]))


# ---------------------------------------------------------------- model ----

@dataclass(frozen=True, eq=False)
class ClassifierModel:
    """
    ClassifierModel : trained parameters.
    NAIVE_BAYES : class_log_prior, log_p1/log_p0 (boolean features),
                  bin_edges, bin_log_prob (numeric features)
    LOGISTIC_REGRESSION : weights, bias, mean, scale
    """

    kind: str
    schema: FeatureSchema
    params: Mapping[str, np.ndarray]

    def to_json(self) -> bytes:
        data = {
            "kind": self.kind,
            "schema": self.schema.to_dict(),
            "params": {k: np.asarray(v).tolist() for k, v in self.params.items()},
        }
        return json.dumps(data, indent=1).encode("utf-8")

    @classmethod
    def from_json(cls, data: Union[bytes, str]) -> "ClassifierModel":
        try:
            parsed = json.loads(data)
            kind = parsed["kind"]
            schema = FeatureSchema.from_dict(parsed["schema"])
            params = {k: np.asarray(v, dtype=float) for k, v in parsed["params"].items()}
        except (json.JSONDecodeError, UnicodeDecodeError, KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"malformed classifier model: {e}", "model") from e
        if kind not in (KIND_NAIVE_BAYES, KIND_LOGISTIC_REGRESSION):
            raise SchemaError(f"unknown classifier kind {kind!r}", "model.kind")
        return cls(kind, schema, params)


def _matrix(dataset: Sequence[Tuple[FeatureVector, int]]) -> Tuple[FeatureSchema, np.ndarray, np.ndarray]:
    if not dataset:
        raise DegenerateDataError("empty training set")
    schema = dataset[0][0].schema
    if any(fv.schema.hash != schema.hash for fv, _ in dataset):
        raise SchemaMismatchError("training vectors come from different feature schemas")
    X = np.vstack([fv.values for fv, _ in dataset])
    y = np.array([int(label) for _, label in dataset], dtype=float)
    if set(np.unique(y)) - {0.0, 1.0}:
        raise DegenerateDataError("labels must be 0 or 1")
    if len(np.unique(y)) < 2:
        raise DegenerateDataError("training set holds a single class")
    return schema, X, y


def _train_naive_bayes(schema: FeatureSchema, X: np.ndarray, y: np.ndarray, alpha: float) -> ClassifierModel:
    numeric = schema.numeric_mask
    B, N = X[:, ~numeric] > 0.5, X[:, numeric]
    counts = np.array([np.sum(y == 0), np.sum(y == 1)], dtype=float)
    class_log_prior = np.log(counts / counts.sum())
    ones = np.vstack([B[y == c].sum(axis=0) for c in (0, 1)]).astype(float)
    p1 = (ones + alpha) / (counts[:, None] + 2 * alpha)
    # quartile bins learned on the training rows
    edges = np.quantile(N, [0.25, 0.5, 0.75], axis=0).T if N.shape[1] else np.zeros((0, _NB_BINS - 1))
    bins = _bin(N, edges)
    bin_log_prob = np.zeros((2, N.shape[1], _NB_BINS))
    for c in (0, 1):
        for j in range(N.shape[1]):
            hist = np.bincount(bins[y == c, j], minlength=_NB_BINS).astype(float)
            bin_log_prob[c, j] = np.log((hist + alpha) / (counts[c] + _NB_BINS * alpha))
    params = {
        "class_log_prior": class_log_prior,
        "log_p1": np.log(p1),
        "log_p0": np.log1p(-p1),
        "bin_edges": edges,
        "bin_log_prob": bin_log_prob,
    }
    return ClassifierModel(KIND_NAIVE_BAYES, schema, params)


def _bin(N: np.ndarray, edges: np.ndarray) -> np.ndarray:
    out = np.zeros(N.shape, dtype=int)
    for j in range(N.shape[1]):
        out[:, j] = np.searchsorted(edges[j], N[:, j], side="right")
    return out


def _nb_log_joint(model: ClassifierModel, X: np.ndarray) -> np.ndarray:
    numeric = model.schema.numeric_mask
    p = model.params
    B, N = X[:, ~numeric] > 0.5, X[:, numeric]
    joint = np.tile(p["class_log_prior"], (X.shape[0], 1))
    joint += B @ p["log_p1"].T + (~B) @ p["log_p0"].T
    edges = np.asarray(p["bin_edges"]).reshape(N.shape[1], _NB_BINS - 1)
    bins = _bin(N, edges)
    table = np.asarray(p["bin_log_prob"]).reshape(2, N.shape[1], _NB_BINS)
    for j in range(N.shape[1]):
        joint[:, 0] += table[0, j, bins[:, j]]
        joint[:, 1] += table[1, j, bins[:, j]]
    return joint


def logistic_loss_and_gradient(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray,
                               l2: float) -> Tuple[float, np.ndarray, float]:
    """
    Mean negative log-likelihood plus l2/2 * |w|^2 (bias not penalized).
    Returns (loss, d loss / d w, d loss / d bias).
    """
    z = X @ weights + bias
    # log(1 + e^z) - y z, stable for large |z|
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * weights @ weights)
    residual = _sigmoid(z) - y
    grad_w = X.T @ residual / X.shape[0] + l2 * weights
    grad_b = float(np.mean(residual))
    return loss, grad_w, grad_b


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -z))


def fit_logistic_regression(X: np.ndarray, y: np.ndarray, cfg: Optional[PipelineConfig] = None
                            ) -> Tuple[np.ndarray, float, List[float]]:
    """
    Gradient descent from zero weights. Each step starts at the configured
    learning rate and halves it until the loss decreases enough (Armijo),
    so the loss history never increases. Stops when the gradient norm falls
    below the tolerance or after the iteration limit.
    """
    cfg = cfg or PipelineConfig()
    weights, bias = np.zeros(X.shape[1]), 0.0
    loss, grad_w, grad_b = logistic_loss_and_gradient(weights, bias, X, y, cfg.lr_l2)
    history = [loss]
    for _ in range(cfg.lr_max_iterations):
        norm2 = float(grad_w @ grad_w + grad_b * grad_b)
        if np.sqrt(norm2) < cfg.lr_tolerance:
            break
        step = cfg.lr_learning_rate
        while True:
            new_w, new_b = weights - step * grad_w, bias - step * grad_b
            new_loss, new_gw, new_gb = logistic_loss_and_gradient(new_w, new_b, X, y, cfg.lr_l2)
            if new_loss <= loss - 0.5 * step * norm2 or step < 1e-12:
                break
            step /= 2
        if new_loss > loss:
            break
        weights, bias, loss, grad_w, grad_b = new_w, new_b, new_loss, new_gw, new_gb
        history.append(loss)
    logger.debug("Logistic regression: %d iteration(s), loss %.6f", len(history) - 1, loss)
    return weights, bias, history


def _train_logistic_regression(schema: FeatureSchema, X: np.ndarray, y: np.ndarray,
                               cfg: PipelineConfig) -> ClassifierModel:
    numeric = schema.numeric_mask
    mean = np.where(numeric, X.mean(axis=0), 0.0)
    std = X.std(axis=0)
    scale = np.where(numeric & (std > 0), std, 1.0)
    weights, bias, _ = fit_logistic_regression((X - mean) / scale, y, cfg)
    params = {"weights": weights, "bias": np.array([bias]), "mean": mean, "scale": scale}
    return ClassifierModel(KIND_LOGISTIC_REGRESSION, schema, params)


def train(dataset: Sequence[Tuple[FeatureVector, int]], kind: str,
          cfg: Optional[PipelineConfig] = None) -> ClassifierModel:
    """Trains a first-page classifier; labels are 1 for invoice first pages"""
    cfg = cfg or PipelineConfig()
    schema, X, y = _matrix(dataset)
    if kind == KIND_NAIVE_BAYES:
        return _train_naive_bayes(schema, X, y, cfg.nb_alpha)
    if kind == KIND_LOGISTIC_REGRESSION:
        return _train_logistic_regression(schema, X, y, cfg)
    raise ConfigError(f"unknown classifier kind {kind!r}")


def predict_proba(model: ClassifierModel, X: np.ndarray) -> np.ndarray:
    """Probability of label 1 for each row of X"""
    if model.kind == KIND_NAIVE_BAYES:
        joint = _nb_log_joint(model, X)
        return np.exp(joint[:, 1] - np.logaddexp(joint[:, 0], joint[:, 1]))
    p = model.params
    z = ((X - p["mean"]) / p["scale"]) @ p["weights"] + float(np.ravel(p["bias"])[0])
    return _sigmoid(z)


def predict(model: ClassifierModel, fv: FeatureVector) -> Tuple[int, float]:
    if fv.schema.hash != model.schema.hash:
        raise SchemaMismatchError("feature vector schema does not match the model")
    probability = float(predict_proba(model, fv.values[None, :])[0])
    return int(probability >= 0.5), probability


# ---------------------------------------------------- cross validation -----

def _stratified_folds(y: np.ndarray, k: int, seed: int) -> List[np.ndarray]:
    rng = np.random.default_rng(seed)
    folds: List[List[int]] = [[] for _ in range(k)]
    position = 0
    for label in (0, 1):
        indices = np.flatnonzero(y == label)
        rng.shuffle(indices)
        for index in indices:
            folds[position % k].append(int(index))
            position += 1
    return [np.array(sorted(f), dtype=int) for f in folds]


def _scores(truth: np.ndarray, predicted: np.ndarray) -> Tuple[float, float, float]:
    tp = float(np.sum((predicted == 1) & (truth == 1)))
    fp = float(np.sum((predicted == 1) & (truth == 0)))
    fn = float(np.sum((predicted == 0) & (truth == 1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def cross_validate(dataset: Sequence[Tuple[FeatureVector, int]], kind: str, k: Optional[int] = None,
                   cfg: Optional[PipelineConfig] = None) -> Tuple[float, float, float]:
    """
    Stratified k-fold cross validation with seeded shuffling.
    Returns mean (precision, recall, F1) of label 1 over the folds.
    """
    cfg = cfg or PipelineConfig()
    k = k or cfg.cv_folds
    schema, X, y = _matrix(dataset)
    if k < 2 or len(dataset) < k:
        raise DegenerateDataError(f"{k}-fold cross validation needs at least {k} samples, got {len(dataset)}")
    results = []
    for fold in _stratified_folds(y, k, cfg.cv_seed):
        mask = np.zeros(len(y), dtype=bool)
        mask[fold] = True
        train_set = [dataset[i] for i in np.flatnonzero(~mask)]
        model = train(train_set, kind, cfg)
        predicted = (predict_proba(model, X[mask]) >= 0.5).astype(int)
        results.append(_scores(y[mask].astype(int), predicted))
    precision, recall, f1 = (float(v) for v in np.mean(results, axis=0))
    logger.info("%s %d-fold: precision %.3f recall %.3f F1 %.3f", kind, k, precision, recall, f1)
    return precision, recall, f1
