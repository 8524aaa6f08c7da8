use std::fmt;

/// Index of a transmitter/receiver pair, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairId(pub usize);

/// Index of a radio in the link table. Pair `i` owns nodes `2i` (transmitter)
/// and `2i + 1` (receiver).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl PairId {
    pub fn transmitter(self) -> NodeId {
        NodeId(2 * self.0)
    }

    pub fn receiver(self) -> NodeId {
        NodeId(2 * self.0 + 1)
    }
}

impl NodeId {
    pub fn pair(self) -> PairId {
        PairId(self.0 / 2)
    }

    pub fn is_transmitter(self) -> bool {
        self.0.is_multiple_of(2)
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pair{}", self.0 + 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let role = if self.is_transmitter() { 'T' } else { 'R' };
        write!(f, "{role}{}", self.0 / 2 + 1)
    }
}
