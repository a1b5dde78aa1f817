//! Independent checks of the closed forms: direct sampling, explicit
//! recurrence iteration, point evaders and an occupancy-grid simulation.

pub mod confinement;
pub mod evader;
pub mod grid;
pub mod pose;
pub mod recurrence;

pub use confinement::{brute_force_t_star, check_confinement};
pub use grid::{simulate, GridConfig, OccupancyGrid, SimulationResult};
pub use pose::{SensorMode, SensorPose, Timeline};
