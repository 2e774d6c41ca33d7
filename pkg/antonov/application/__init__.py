"""Application layer: one use case per command of the pipeline."""
