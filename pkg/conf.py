#!/usr/bin/env python

"""conf.py  :  Default configuration file """

####---- Defaults for every run of the semrel tools ----####
# A run config (JSON, passed with --config) only needs the keys that differ from these values.
# Any key can also be overridden from the command line with its dotted name (e.g. --train.batch_size 8).

# ----------
# General information
# ----------
name='' # Name of the person that launches the run.
method='' # Short description of the experiment (e.g. TranSem mean pooling, translated data).
seed=13 # Seed of the run generator (initialization, shuffling, synthetic data).
out='runs/default' # Output directory for checkpoints, histories, predictions and reports.
model='transem' # Model kind to train: transem (bi-encoder) or finesem (cross-encoder).
regime='individual' # FineSem training regime: individual, unified or translated.


# ---------
# Data needs:
# ----------
data_format='columnar' # columnar (id, sentence1, sentence2, score as TSV) or semrel-compat (PairID, Text, Score CSV).
data_paths={} # {"eng": {"train": "path", "dev": "path", "test": "path"}, ...}
translate_data=False # Train on translated and augmented data (and translate dev/test with the primary backend).

# ----------
# Translation needs:
# ----------
# One entry per translator: {"name": ..., "kind": identity|lexicon|remote, "primary": true|false,
#                            "lexicon": {...} or "lexicon_path": ..., "endpoint": ..., "languages": [...]}
# Exactly one backend must be primary, it is the one used for dev and test data.
backends=[]
translation_parallelism=4 # Maximum number of in-flight remote requests.
translation_batch_size=32 # Texts sent per remote request.
translation_retries=3 # Attempts per remote request.
translation_backoff=0.25 # First retry delay in seconds, doubled on each retry.
translation_timeout=30.0 # Per-request timeout in seconds.

# ----------
# Tokenizer and encoder needs:
# ----------
vocab_size=32768 # Size of the hashed vocabulary (ids 0, 1, 2 are CLS, SEP, UNK).
hash_seed=0 # Seed mixed into the token hash.
lowercase=True
embedding_dim=64

# ----------
# TranSem needs:
# ----------
learning_rate=1e-5
weight_decay=0.01
batch_size=16
grad_accum_steps=2 # Effective batch is batch_size x grad_accum_steps.
patience=10 # Epochs without a strict dev Spearman improvement before stopping.
max_epochs=None # None trains until early stopping.
pooling='Mean' # CLS, Mean or Max.

# ---------
# FineSem needs:
# ---------
finesem_epochs=None # None uses 10 epochs (2 for the translated regime).
finesem_batch_size=16
finesem_learning_rate=1e-5
finesem_weight_decay=0.01
finesem_pooling='Mean'
fixed_epoch=None # Use this epoch's checkpoint instead of the best one on dev.

# ---------
# Evaluation needs:
# ---------
eval_split='test' # Split scored by sweep and crosslingual (falls back to dev when it has no gold scores).
baseline_track='A' # A (supervised) or C (cross-lingual) baseline values for the report.

# ---------
# Sweep needs:
# ---------
sweep_batch_sizes=[2, 4, 8, 16, 64, 128, 256]
sweep_poolings=['CLS', 'Mean', 'Max']
