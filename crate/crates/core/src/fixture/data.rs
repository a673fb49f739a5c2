#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectRow {
    pub id: &'static str,
    pub name: &'static str,
    pub description: &'static str,
    pub owner: &'static str,
    pub members: &'static [&'static str],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UserRow {
    pub id: &'static str,
    pub name: &'static str,
    pub age: i64,
}

pub const PROJECTS: [ProjectRow; 5] = [
    ProjectRow {
        id: "101",
        name: "apollo",
        description: "launch tracking",
        owner: "201",
        members: &["201", "202", "203"],
    },
    ProjectRow {
        id: "102",
        name: "borealis",
        description: "aurora forecasts",
        owner: "202",
        members: &["202", "204"],
    },
    ProjectRow {
        id: "103",
        name: "cygnus",
        description: "",
        owner: "203",
        members: &["203", "205", "206", "207"],
    },
    ProjectRow {
        id: "104",
        name: "draco",
        description: "build cache",
        owner: "204",
        members: &["204"],
    },
    ProjectRow {
        id: "105",
        name: "eridanus",
        description: "river gauges",
        owner: "205",
        members: &["205", "208", "201"],
    },
];

pub const USERS: [UserRow; 8] = [
    UserRow {
        id: "201",
        name: "alice",
        age: 34,
    },
    UserRow {
        id: "202",
        name: "bob",
        age: 27,
    },
    UserRow {
        id: "203",
        name: "carol",
        age: 41,
    },
    UserRow {
        id: "204",
        name: "dave",
        age: 23,
    },
    UserRow {
        id: "205",
        name: "erin",
        age: 38,
    },
    UserRow {
        id: "206",
        name: "frank",
        age: 52,
    },
    UserRow {
        id: "207",
        name: "grace",
        age: 30,
    },
    UserRow {
        id: "208",
        name: "heidi",
        age: 45,
    },
];

pub fn project_index(id: &str) -> Option<usize> {
    PROJECTS.iter().position(|p| p.id == id)
}

pub fn user_index(id: &str) -> Option<usize> {
    USERS.iter().position(|u| u.id == id)
}

/// Projects a user owns or is a member of.
pub fn projects_of(user_id: &str) -> Vec<usize> {
    PROJECTS
        .iter()
        .enumerate()
        .filter(|(_, p)| p.owner == user_id || p.members.contains(&user_id))
        .map(|(i, _)| i)
        .collect()
}
