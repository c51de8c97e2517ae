"""Perturbation-based local and global explanations for black-box text classifiers."""

from .config import RunConfig
from .errors import (
    BadConfig,
    BadReport,
    DegenerateInput,
    EmptyCorpus,
    EmptyDocument,
    EmptyInput,
    ExplainError,
    InvalidFeature,
    IoFailure,
    MissingLexicon,
    ModelUnavailable,
    ProtocolViolation,
    RemoteModelError,
)
from .features import (
    InterpretableFeature,
    combine_pairwise,
    extract_pos_features,
    extract_sentence_features,
)
from .gateway import (
    ExternalModel,
    LayeredEmbeddings,
    ModelInfo,
    PredictionVector,
    ReferenceModel,
    open_model,
    ref_hash_feature,
)
from .global_scores import GlobalScores, aggregate_corpus, corpus_document, gai, gri
from .local import (
    ExplanationSet,
    LocalExplanation,
    explain_document,
    most_informative,
    npir,
)
from .mlwe import (
    Partition,
    aggregate_layers,
    k_max,
    k_score,
    kmeans,
    pca_reduce,
    select_best_partition,
)
from .perturb import PerturbedVariant, perturb_removal, perturb_substitution
from .textprep import (
    Lexicons,
    SentenceSpan,
    Token,
    detokenize,
    lemmatize,
    load_lexicons,
    pos_tag,
    split_sentences,
    tokenize,
)

__version__ = "0.1.0"
