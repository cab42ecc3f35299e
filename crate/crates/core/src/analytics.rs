//! Measurement and closed-form verification layer.
