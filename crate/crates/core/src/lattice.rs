//! Discrete-space growth models.
