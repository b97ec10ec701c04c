"""numsarc: detecting sarcasm caused by numerical content in short texts.

The package covers the whole pipeline: corpus normalization and dataset
shapes, tokenization/tagging/noun-phrase chunking, word embeddings, the
two-repository rule cascade, hand-engineered features with KNN/SVM/forest
classifiers, three small neural models on a reverse-mode autodiff core, and
a metrics/cross-validation harness with a command-line front end.
"""

__version__ = "0.1.0"
