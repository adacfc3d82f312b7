use std::fmt;

use serde::{Deserialize, Serialize};

/// Cone memberships tracked on expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassTag {
    /// completely monotone
    CM,
    /// Bernstein function
    BF,
    /// complete Bernstein function
    CBF,
    /// Stieltjes function
    S,
}

impl ClassTag {
    pub const ALL: [ClassTag; 4] = [ClassTag::CM, ClassTag::BF, ClassTag::CBF, ClassTag::S];

    fn bit(self) -> u8 {
        match self {
            ClassTag::CM => 1,
            ClassTag::BF => 2,
            ClassTag::CBF => 4,
            ClassTag::S => 8,
        }
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassTag::CM => "CM",
            ClassTag::BF => "BF",
            ClassTag::CBF => "CBF",
            ClassTag::S => "S",
        };
        f.write_str(s)
    }
}

/// A set of [`ClassTag`]s closed under the inclusions CBF ⊂ BF and S ⊂ CM.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ClassTags(u8);

impl ClassTags {
    pub const fn empty() -> Self {
        ClassTags(0)
    }

    pub fn of(tags: &[ClassTag]) -> Self {
        let mut set = ClassTags::empty();
        for &t in tags {
            set.insert(t);
        }
        set
    }

    pub fn insert(&mut self, tag: ClassTag) {
        self.0 |= tag.bit();
        match tag {
            ClassTag::CBF => self.0 |= ClassTag::BF.bit(),
            ClassTag::S => self.0 |= ClassTag::CM.bit(),
            _ => {}
        }
    }

    pub fn contains(&self, tag: ClassTag) -> bool {
        self.0 & tag.bit() != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: ClassTags) -> ClassTags {
        ClassTags(self.0 | other.0)
    }

    pub fn intersection(self, other: ClassTags) -> ClassTags {
        ClassTags(self.0 & other.0)
    }

    pub fn is_subset(&self, other: &ClassTags) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = ClassTag> + '_ {
        ClassTag::ALL.into_iter().filter(|t| self.contains(*t))
    }
}

impl fmt::Display for ClassTags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.iter().map(|t| t.to_string()).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

impl Serialize for ClassTags {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}
