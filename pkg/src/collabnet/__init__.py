"""Weighted film-collaboration graph analytics."""

__version__ = "0.1.0"

from .centrality import (
    ScoreTable,
    build_personalization,
    closeness_centrality,
    degree_centrality,
    personalized_pagerank,
    top_k,
)
from .cohort import cohort_statistics, extract_features, label_cohort, pearson, spearman
from .graph import (
    CollabGraph,
    PathResult,
    average_path_length,
    build_graph,
    clustering_coefficient,
    degree_distribution,
    shortest_path,
)
from .influence import InfluenceParams, effective_influence, influence_to_top_directors
from .ingest import (
    FilmRecord,
    PreprocessConfig,
    RelationRecord,
    YearWindow,
    apply_actor_cap,
    impute_votes,
    normalize_votes,
    parse_films,
    parse_relations,
    preprocess,
)
from .linkpred import adamic_adar, jaccard
