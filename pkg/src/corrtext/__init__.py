"""Text-driven forecasting of stock-bond correlation regime changes.

Pipeline stages: ingest news/market CSVs, score headlines against
directional hypotheses, aggregate weekly topic scores, build a weekly
feature matrix, predict the 6-month correlation change with a
deterministic gradient-boosted tree ensemble, evaluate walk-forward
against benchmarks, and attribute predictions with exact TreeSHAP.
"""

__version__ = "0.1.0"
