"""CLI and REST facade over tracking, scoring, the baseline, and validation."""
