"""Cross-cutting infrastructure: errors, quadrature rules, thread pool, observability.

Nothing in here knows about steady states or operators.
"""
