//! Per-coverage-group convexified max-min rate problem and the SCA loop.
