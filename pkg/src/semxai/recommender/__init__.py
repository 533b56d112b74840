from .embeddings import (
    DuplicateToken,
    EmbeddingFormatError,
    EmbeddingTable,
    MalformedHeader,
    TruncatedEntry,
    dump_embeddings,
    load_embeddings,
    parse_embeddings,
    save_embeddings,
)
from .ranking import (
    DatasetMetadata,
    DocumentBag,
    EmptyBag,
    EmptyInput,
    FixtureDatasetBackend,
    NoRankableCandidates,
    RankedDataset,
    bag_from_counts,
    diversity_sample,
    load_dataset_metadata,
    rank_datasets,
    rwmd_lower_bound,
    to_nbow,
    wmd,
    wmd_plan,
)
from .transport import solve_transport
