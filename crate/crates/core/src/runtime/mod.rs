//! Master/worker runtime (placeholder while scaffolding).
