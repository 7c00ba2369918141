//! Network-wide time allocation and the full two-stage pipeline.
