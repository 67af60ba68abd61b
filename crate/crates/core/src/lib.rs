pub mod linalg;
pub mod observable;
pub mod outcome;
pub mod pauli;
pub mod statevector;
pub mod stabilizer;
pub mod gadgets;
pub mod ancilla;
pub mod compiler;
pub mod stats;
