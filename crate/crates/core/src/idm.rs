//! Inverse-dynamics model (placeholder while scaffolding).
