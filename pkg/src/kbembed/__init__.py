"""kbembed: graph embeddings from lexical knowledge bases.

Builds lexical graphs from cue/response strength tables or typed edge
lists, converts them to dense word embeddings (PMI, Katz factorization,
random-walk skip-gram, or semantic-matching-energy training), and
evaluates any embedding matrix on word-similarity benchmarks and on
fMRI activation prediction.
"""

from kbembed.vocab import Vocabulary, normalize_word
from kbembed.graph import (
    CountMatrix,
    GraphFormatError,
    LexicalGraph,
    ingest_edge_list,
    ingest_swow,
    select_subgraph,
    to_adjacency,
)
from kbembed.embeddings import EmbeddingMatrix, read_embeddings, write_embeddings
from kbembed.spectral import (
    DenseMatrix,
    SpectralParams,
    katz_index,
    l2_normalize_rows,
    pca_reduce,
    pipeline_katz,
    pipeline_pmi,
    ppmi_transform,
)
from kbembed.walk import WalkCorpus, WalkParams, generate_walk_corpus
from kbembed.sgns import SgnsParams, pipeline_walk, train_skipgram
from kbembed.sme import (
    SmeModel,
    SmeTrainParams,
    TripleSet,
    sme_score,
    split_triples,
    swow_triples,
    train_sme,
    wordnet_triples,
)
from kbembed.simeval import PairDataset, SimResult, cosine, evaluate_similarity, spearman
from kbembed.brain import (
    DecoderModel,
    DecoderParams,
    FmriDataset,
    combined_loss,
    mse_eval,
    representative_images,
    stable_voxels,
    train_decoder,
    two_vs_two,
    voxel_stability,
)

__version__ = "0.1.0"
