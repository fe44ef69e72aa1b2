//! Acceptance checks for idflow. The checks live in `tests/acceptance.rs`;
//! run them with `cargo test -p idflow-validation`.
