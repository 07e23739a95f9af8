//! Experiment tooling (placeholder while scaffolding).
