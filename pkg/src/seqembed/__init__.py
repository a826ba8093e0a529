"""Sequentially trainable node2vec graph embeddings for dynamic graphs.

A biased-random-walk engine feeds either a recursive-least-squares
skip-gram with tied weights (the sequentially trainable model) or a
plain SGD skip-gram baseline; a spanning-forest edge stream drives the
dynamic-graph training scenario, and a one-vs-rest logistic-regression
evaluator scores the resulting embeddings.
"""

from .evaluation import (EvalSummary, F1Report, LabeledSplit, evaluate_embedding,
                         f1_scores, make_split, train_ovr_logreg)
from .experiments import (ExperimentConfig, MetricsRecord, RunResult, bench_walk,
                          run_all, run_experiment, run_seq, sweep_mu,
                          sweep_table_update)
from .graph import EdgeStream, Graph, GraphError, connected_components, spanning_forest_split
from .oselm import (OselmModel, SingularUpdateError, TrainDelta, context_update,
                    dense_update, embedding_snapshot, hidden_activation, init_model,
                    parameter_count, walk_update_dataflow)
from .oselm import train_walk as oselm_train_walk
from .sampling import (AliasTable, FrequencyCounter, NegativeSampler, TablePolicy,
                       alias_sample, build_alias, negatives_for_walk,
                       reconstructed_distribution)
from .sgd import (SgdModel, init_sgd, sgd_context_update, sgd_embedding_snapshot,
                  sgd_parameter_count, sgns_gradients)
from .sgd import train_walk as sgd_train_walk
from .walks import (DeadEndError, WalkConfig, WalkContext, context_arrays, contexts,
                    random_walk, step_distribution)

__version__ = "0.1.0"
