pub mod linalg;
pub mod bp;
pub mod cobar;
pub mod am;
pub mod slice;
pub mod oracle;
pub mod chart;
