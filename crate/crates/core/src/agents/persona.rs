//! Persona files: one TOML document per player with `player`,
//! `profession`, `personality` and `background` keys.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::AgentError;
use crate::engine::{PersonaText, PlayerId, PlayerSpec};

const BUNDLED: [&str; 5] = [
    include_str!("../../personas/alex.toml"),
    include_str!("../../personas/bob.toml"),
    include_str!("../../personas/cindy.toml"),
    include_str!("../../personas/david.toml"),
    include_str!("../../personas/eric.toml"),
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PersonaFile {
    player: String,
    profession: String,
    personality: String,
    background: String,
}

pub fn parse_persona(text: &str) -> Result<(PlayerId, PersonaText), AgentError> {
    let file: PersonaFile =
        toml::from_str(text).map_err(|e| AgentError::Persona(e.to_string()))?;
    let persona = PersonaText {
        profession: file.profession,
        personality: file.personality,
        background: file.background,
    };
    persona
        .validate()
        .map_err(|e| AgentError::Persona(e.to_string()))?;
    Ok((PlayerId::new(file.player), persona))
}

/// Example personas for the standard roster. They are illustrative only.
pub fn bundled_personas() -> BTreeMap<PlayerId, PersonaText> {
    BUNDLED
        .iter()
        .map(|t| parse_persona(t).expect("bundled personas are valid"))
        .collect()
}

/// Loads every `*.toml` file in `dir`.
pub fn load_persona_dir(dir: &Path) -> Result<BTreeMap<PlayerId, PersonaText>, AgentError> {
    let mut out = BTreeMap::new();
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| AgentError::Persona(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    for path in paths {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| AgentError::Persona(format!("{}: {e}", path.display())))?;
        let (id, persona) = parse_persona(&text)
            .map_err(|e| AgentError::Persona(format!("{}: {e}", path.display())))?;
        if out.insert(id.clone(), persona).is_some() {
            return Err(AgentError::Persona(format!("two persona files for `{id}`")));
        }
    }
    Ok(out)
}

/// Gives every roster entry its persona; all players must be covered.
pub fn attach_personas(
    roster: &mut [PlayerSpec],
    personas: &BTreeMap<PlayerId, PersonaText>,
) -> Result<(), AgentError> {
    for p in roster.iter_mut() {
        let persona = personas
            .get(&p.id)
            .ok_or_else(|| AgentError::MissingPersona(p.id.clone()))?;
        p.persona = Some(persona.clone());
    }
    Ok(())
}
