"""minutemeta: two-stage metadata extraction from municipal meeting minutes.

Stage 1 locates the opening/closing sections of a minute with an extractive
QA model; stage 2 runs token-level entity recognition over the reduced
region. The package also ships the evaluation harness (metrics, protocols,
resource metering), retrieval baselines, a structured-output baseline for
generative models, and a CLI.
"""

__version__ = "0.1.0"
