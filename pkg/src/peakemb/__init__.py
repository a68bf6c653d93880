"""Fixed-length peak embeddings of speech rhythm and their evaluation.

Library surface: WAV ingestion and descriptor tracks (:mod:`~peakemb.audio`),
peak embeddings (:mod:`~peakemb.embedding`), baseline temporal functionals
(:mod:`~peakemb.functionals`), separability metrics (:mod:`~peakemb.metrics`),
exact t-SNE (:mod:`~peakemb.tsne`), the experiment harness
(:mod:`~peakemb.harness`) and a deterministic corpus synthesizer
(:mod:`~peakemb.synth`).
"""

from .audio import (
    AudioBuffer,
    Descriptor,
    FrameConfig,
    LldTrack,
    estimate_f0,
    estimate_loudness,
    extract_tracks,
    frame_signal,
    load_wav,
)
from .embedding import (
    CombineMode,
    Normalization,
    PeakEmbedding,
    PeConfig,
    PitchScope,
    combine,
    embed_track,
    moving_average,
    peak_embed,
    preprocess_track,
)
from .errors import PeakembError
from .functionals import (
    PeakPicking,
    TemporalFunctionals,
    compute_functionals,
    segment_voiced_regions,
)
from .harness import (
    DatasetManifest,
    ExperimentReport,
    ExtractionConfig,
    FeatureSet,
    ManifestEntry,
    aggregate_report,
    extract_features,
    load_manifest,
    run_pair_experiment,
    run_word_experiment,
)
from .metrics import (
    LabeledPointSet,
    MetricPair,
    evaluate_metrics,
    gsi,
    pairwise_distances,
    silhouette_coefficient,
)
from .synth import render_utterance, synthesize_rhythm_corpus
from .tsne import Projection2D, TsneConfig, tsne_project

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer",
    "CombineMode",
    "DatasetManifest",
    "Descriptor",
    "ExperimentReport",
    "ExtractionConfig",
    "FeatureSet",
    "FrameConfig",
    "LabeledPointSet",
    "LldTrack",
    "ManifestEntry",
    "MetricPair",
    "Normalization",
    "PeConfig",
    "PeakEmbedding",
    "PeakPicking",
    "PeakembError",
    "PitchScope",
    "Projection2D",
    "TemporalFunctionals",
    "TsneConfig",
    "aggregate_report",
    "combine",
    "compute_functionals",
    "embed_track",
    "estimate_f0",
    "estimate_loudness",
    "evaluate_metrics",
    "extract_features",
    "extract_tracks",
    "frame_signal",
    "gsi",
    "load_manifest",
    "load_wav",
    "moving_average",
    "pairwise_distances",
    "peak_embed",
    "preprocess_track",
    "render_utterance",
    "run_pair_experiment",
    "run_word_experiment",
    "segment_voiced_regions",
    "silhouette_coefficient",
    "synthesize_rhythm_corpus",
    "tsne_project",
]
