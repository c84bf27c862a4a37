//! Small hand-built instances used throughout the tests and the guide.

use crate::model::Instance;

/// Triangle 1→2→3 plus the shortcut 1→3, no sight. The shortcut (0.7)
/// beats the detour (0.5 × 0.5).
pub fn triangle() -> Instance {
    Instance::builder(3, 1, 3)
        .edge(1, 2, "0.5")
        .edge(2, 3, "0.5")
        .edge(1, 3, "0.3")
        .build()
        .expect("triangle fixture is valid")
}

/// Triangle where the start can see the second leg of the detour.
pub fn sighted_triangle() -> Instance {
    Instance::builder(3, 1, 3)
        .edge(1, 2, "0.1")
        .edge(2, 3, "0.5")
        .edge(1, 3, "0.2")
        .sight(1, 2, 3)
        .build()
        .expect("sighted triangle fixture is valid")
}

/// A direct edge worth 0.6 against a detour through vertex 2, which sees
/// both of its fair-coin exits. Ignoring sight, the detour looks like 0.45;
/// with sight it is worth 0.675.
pub fn greedy_trap() -> Instance {
    Instance::builder(5, 1, 5)
        .edge(1, 2, "0.1")
        .edge(1, 5, "0.4")
        .edge(2, 3, "0.5")
        .edge(2, 4, "0.5")
        .edge(3, 5, "0")
        .edge(4, 5, "0")
        .sight(2, 2, 3)
        .sight(2, 2, 4)
        .build()
        .expect("greedy trap fixture is valid")
}

/// Chain 1→2→3→4 of fair coins, no sight.
pub fn chain() -> Instance {
    Instance::builder(4, 1, 4)
        .edge(1, 2, "0.5")
        .edge(2, 3, "0.5")
        .edge(3, 4, "0.5")
        .build()
        .expect("chain fixture is valid")
}
