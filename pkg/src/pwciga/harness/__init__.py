"""Command line, benchmarks, self-checks and image I/O."""
