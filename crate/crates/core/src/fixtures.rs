//! Bundled example documents.

pub const JOHN_DOE: &str = include_str!("../fixtures/johndoe.tm");
pub const CHEESEHUT: &str = include_str!("../fixtures/cheesehut.tm");
/// Valid model with transit routes through a depot and its hall.
pub const RELAY: &str = include_str!("../fixtures/relay.tm");
/// Deliberately broken: a create on a transit route.
pub const BAD_TRANSIT: &str = include_str!("../fixtures/bad-transit.tm");

pub const ALL: [(&str, &str); 4] = [
    ("johndoe.tm", JOHN_DOE),
    ("cheesehut.tm", CHEESEHUT),
    ("relay.tm", RELAY),
    ("bad-transit.tm", BAD_TRANSIT),
];
