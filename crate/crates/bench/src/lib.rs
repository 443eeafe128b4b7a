//! Benchmarks for rrt-core; see benches/.
