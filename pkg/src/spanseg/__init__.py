"""Span segmentation and span-enhanced sentence encoding toolkit."""

from .ngrams import (
    NgramDictionary,
    build_dictionary,
    count_ngrams,
    empty_dictionary,
    load_dictionary,
    normalize,
    prune_to_size,
    save_dictionary,
)
from .segment import (
    SpanPartition,
    SubwordAlignment,
    WordSequence,
    identity_alignment,
    load_external_segmentation,
    normalize_and_tokenize,
    project_to_subwords,
    segment_greedy,
    segment_random,
    span_stats,
)
from .encoder import (
    EncoderParams,
    SpanTensor,
    backward,
    concat_cls,
    encode_token_level,
    forward,
    gather_spans,
    grad_check,
    self_attentive_pool,
    span_stage,
    token_stage,
)
from .toyenc import ToyEncoderConfig, read_embeddings, toy_encode, write_embeddings
from .train import (
    LabeledExample,
    TrainConfig,
    adam_step,
    cross_entropy,
    load_dataset,
    lr_at_step,
    predict,
    train,
)
from .metrics import (
    classification_metrics,
    matthews_corr,
    mcnemar_test,
    pearson_corr,
)

__version__ = "0.1.0"
