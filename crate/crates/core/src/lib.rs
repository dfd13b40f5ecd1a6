//! Simulated peg-in-hole insertion with a wrist-mounted RGB-D camera.
//!
//! `geometry` holds the arm kinematics and the scene, `render` the raycaster,
//! `augment` the image corruptions, `env` the episode API, `agents` the
//! networks and TD3/DDPG/SAC learners, `baseline` the classical visual servo,
//! and `harness` the configs, training loop, evaluation protocol and presets.

pub mod geometry;
pub mod render;
pub mod augment;
pub mod env;
pub mod agents;
pub mod baseline;
pub mod harness;
