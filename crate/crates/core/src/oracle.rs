//! Brute-force verifiers for tiny instances.
