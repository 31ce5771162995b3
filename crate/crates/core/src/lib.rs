pub mod coeff_ring;
pub mod drinfeld;
pub mod expr;
pub mod greenberg;
pub mod local_ring;
pub mod verify;
pub mod witt;
