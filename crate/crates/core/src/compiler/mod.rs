//! Routing compilers: calibrated primitives, diamond-chain routes, star
//! phase programs, network routes and multi-packet schedules.

mod calibration;
mod commutator;
mod itinerary;
mod multi;
mod network;
mod prototype;
mod star;

pub use calibration::{
    calibrate_prototype, calibrate_star, PrototypeCalibration, StarCalibration, TransportMap, FIDELITY_TOL,
};
pub use commutator::{
    build_h1, build_port_reflection, commutator_controllability, commutator_report, CommutatorReport,
};
pub use multi::{
    joint_fidelity, schedule_multi, schedule_multi_1d, MultiSchedule, Packet, ScheduledPacket, JOINT_CHECK_MAX_DIM,
};
pub use network::{compile_hop, compile_route, plan_path, BlockDirective, CompiledRoute, NetworkRouter, RoutePlan};
pub use prototype::{
    compile_1d_route, compile_injection_1d, Endpoint, Port, PrototypeRouter, Route1d, TransportPulse,
};
pub use star::{
    compile_entangler, compile_phase_program, cycle_pulse, port_coefficients, w_coefficients, w_mixture,
};
