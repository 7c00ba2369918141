//! Monte-Carlo reflecting-area sizing.
