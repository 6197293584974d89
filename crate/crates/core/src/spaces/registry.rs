//! Space and mapping registry.
//!
//! Registration happens in a single-threaded setup phase; `freeze` produces
//! the immutable registry streaming reads from. Mapping resolution is
//! fewest-hop breadth-first over registered mappings, counting the inverse
//! direction of invertible mappings as edges; ties go to the mapping
//! registered earliest.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::types::{PayloadKind, PayloadValue, Place, SpaceDescriptor, SpaceKind};
use super::SpacesError;

/// The content a mapping transforms, without its space label. The registry
/// owns space bookkeeping; transforms only reshape values.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceValue {
    Position(Place),
    Payload(PayloadValue),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransformError {
    /// Partial mapping, undefined at this input.
    Undefined(String),
    /// The transform was handed a value shape it does not map.
    WrongValueShape,
}

pub trait Transform: Send + Sync {
    fn apply(&self, value: &SpaceValue) -> Result<SpaceValue, TransformError>;
}

impl<F> Transform for F
where
    F: Fn(&SpaceValue) -> Result<SpaceValue, TransformError> + Send + Sync,
{
    fn apply(&self, value: &SpaceValue) -> Result<SpaceValue, TransformError> {
        self(value)
    }
}

/// Metadata of a registered mapping function.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingFunction {
    pub mapping_id: String,
    pub from_space_id: String,
    pub to_space_id: String,
    pub invertible: bool,
    /// Defined on the whole source space, or only part of it.
    pub total: bool,
}

struct RegisteredMapping {
    meta: MappingFunction,
    forward: Arc<dyn Transform>,
    inverse: Option<Arc<dyn Transform>>,
}

/// One step of a resolved mapping path.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingStep {
    pub mapping_id: String,
    pub inverted: bool,
    pub from_space_id: String,
    pub to_space_id: String,
    index: usize,
}

/// An application's preferred spaces: one physical space plus a preferred
/// value space per payload family. Unlisted families pass through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectiveView {
    pub view_id: String,
    pub physical_space_id: Option<String>,
    pub value_space_by_kind: BTreeMap<PayloadKind, String>,
}

impl SubjectiveView {
    pub fn passthrough(view_id: impl Into<String>) -> Self {
        Self {
            view_id: view_id.into(),
            physical_space_id: None,
            value_space_by_kind: BTreeMap::new(),
        }
    }
}

/// Mutable setup-phase registry.
#[derive(Default)]
pub struct SpaceRegistryBuilder {
    spaces: Vec<SpaceDescriptor>,
    mappings: Vec<RegisteredMapping>,
    views: Vec<SubjectiveView>,
}

impl SpaceRegistryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_space(&mut self, descriptor: SpaceDescriptor) -> Result<&mut Self, SpacesError> {
        if self.spaces.iter().any(|s| s.space_id == descriptor.space_id) {
            return Err(SpacesError::DuplicateSpaceId(descriptor.space_id));
        }
        if descriptor.dimensionality == 0 {
            return Err(SpacesError::InvalidSpace {
                space_id: descriptor.space_id,
                reason: "dimensionality must be positive".into(),
            });
        }
        if descriptor.kind == SpaceKind::Temporal && descriptor.dimensionality != 1 {
            return Err(SpacesError::InvalidSpace {
                space_id: descriptor.space_id,
                reason: "temporal spaces are one-dimensional".into(),
            });
        }
        self.spaces.push(descriptor);
        Ok(self)
    }

    /// Register a mapping. Invertible mappings must supply the inverse
    /// transform; the inverse direction then resolves automatically.
    pub fn register_mapping(
        &mut self,
        meta: MappingFunction,
        forward: Arc<dyn Transform>,
        inverse: Option<Arc<dyn Transform>>,
    ) -> Result<&mut Self, SpacesError> {
        if self.mappings.iter().any(|m| m.meta.mapping_id == meta.mapping_id) {
            return Err(SpacesError::DuplicateMappingId(meta.mapping_id));
        }
        for endpoint in [&meta.from_space_id, &meta.to_space_id] {
            if !self.spaces.iter().any(|s| &s.space_id == endpoint) {
                return Err(SpacesError::UnknownSpace(endpoint.clone()));
            }
        }
        if meta.from_space_id == meta.to_space_id {
            return Err(SpacesError::InvalidMapping {
                mapping_id: meta.mapping_id,
                reason: "endpoints must differ".into(),
            });
        }
        if meta.invertible != inverse.is_some() {
            return Err(SpacesError::InvalidMapping {
                mapping_id: meta.mapping_id,
                reason: "invertible mappings require an inverse transform, and only they may carry one".into(),
            });
        }
        self.mappings.push(RegisteredMapping { meta, forward, inverse });
        Ok(self)
    }

    pub fn register_view(&mut self, view: SubjectiveView) -> Result<&mut Self, SpacesError> {
        if self.views.iter().any(|v| v.view_id == view.view_id) {
            return Err(SpacesError::DuplicateViewId(view.view_id));
        }
        let mut referenced: Vec<&String> = view.value_space_by_kind.values().collect();
        if let Some(p) = &view.physical_space_id {
            referenced.push(p);
        }
        for space_id in referenced {
            if !self.spaces.iter().any(|s| &s.space_id == space_id) {
                return Err(SpacesError::UnknownSpace(space_id.clone()));
            }
        }
        self.views.push(view);
        Ok(self)
    }

    /// Freeze the registry. All further access is read-only and safe to
    /// share across threads.
    pub fn freeze(self) -> SpaceRegistry {
        SpaceRegistry {
            spaces: self.spaces,
            mappings: self.mappings,
            views: self.views,
        }
    }
}

/// The frozen registry.
pub struct SpaceRegistry {
    spaces: Vec<SpaceDescriptor>,
    mappings: Vec<RegisteredMapping>,
    views: Vec<SubjectiveView>,
}

impl SpaceRegistry {
    /// Every registered space, in registration order.
    pub fn spaces(&self) -> &[SpaceDescriptor] {
        &self.spaces
    }

    pub fn space(&self, space_id: &str) -> Option<&SpaceDescriptor> {
        self.spaces.iter().find(|s| s.space_id == space_id)
    }

    pub fn views(&self) -> &[SubjectiveView] {
        &self.views
    }

    pub fn view(&self, view_id: &str) -> Option<&SubjectiveView> {
        self.views.iter().find(|v| v.view_id == view_id)
    }

    pub fn mapping(&self, mapping_id: &str) -> Option<&MappingFunction> {
        self.mappings.iter().map(|m| &m.meta).find(|m| m.mapping_id == mapping_id)
    }

    /// Fewest-hop path from one space to another. Empty when they are the
    /// same space.
    pub fn resolve_mapping_path(&self, from: &str, to: &str) -> Result<Vec<MappingStep>, SpacesError> {
        for space_id in [from, to] {
            if self.space(space_id).is_none() {
                return Err(SpacesError::UnknownSpace(space_id.to_string()));
            }
        }
        if from == to {
            return Ok(Vec::new());
        }

        // Breadth-first search; edges are enumerated in registration order
        // (forward before auto-inverse), so the first path found at a given
        // depth is the earliest-registered one.
        let mut visited: Vec<&str> = vec![from];
        let mut frontier: Vec<(String, Vec<MappingStep>)> = vec![(from.to_string(), Vec::new())];
        while !frontier.is_empty() {
            let mut next_frontier = Vec::new();
            for (space, path) in frontier {
                for (index, mapping) in self.mappings.iter().enumerate() {
                    let mut edges = vec![(&mapping.meta.from_space_id, &mapping.meta.to_space_id, false)];
                    if mapping.meta.invertible {
                        edges.push((&mapping.meta.to_space_id, &mapping.meta.from_space_id, true));
                    }
                    for (edge_from, edge_to, inverted) in edges {
                        if edge_from != &space || visited.iter().any(|v| v == edge_to) {
                            continue;
                        }
                        let mut new_path = path.clone();
                        new_path.push(MappingStep {
                            mapping_id: mapping.meta.mapping_id.clone(),
                            inverted,
                            from_space_id: edge_from.clone(),
                            to_space_id: edge_to.clone(),
                            index,
                        });
                        if edge_to == to {
                            return Ok(new_path);
                        }
                        visited.push(edge_to);
                        next_frontier.push((edge_to.clone(), new_path));
                    }
                }
            }
            frontier = next_frontier;
        }
        Err(SpacesError::NoPath {
            from: from.to_string(),
            to: to.to_string(),
        })
    }

    /// Run a value through a resolved path.
    pub fn apply_path(&self, value: SpaceValue, path: &[MappingStep]) -> Result<SpaceValue, SpacesError> {
        let mut current = value;
        for step in path {
            let mapping = &self.mappings[step.index];
            let transform = if step.inverted {
                mapping.inverse.as_ref().expect("inverted step implies an inverse transform")
            } else {
                &mapping.forward
            };
            current = transform.apply(&current).map_err(|e| match e {
                TransformError::Undefined(reason) => SpacesError::PartialMappingUndefined {
                    mapping_id: step.mapping_id.clone(),
                    reason,
                },
                TransformError::WrongValueShape => SpacesError::PartialMappingUndefined {
                    mapping_id: step.mapping_id.clone(),
                    reason: "value shape does not belong to the source space".into(),
                },
            })?;
        }
        Ok(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::convert::{celsius_transform_pair, CELSIUS_TO_FAHRENHEIT_ID};
    use crate::spaces::standard::{SPACE_CELSIUS, SPACE_FAHRENHEIT};

    fn value_space(id: &str) -> SpaceDescriptor {
        SpaceDescriptor::new(id, SpaceKind::Value, id, 1)
    }

    fn builder_with_celsius_chain() -> SpaceRegistryBuilder {
        let mut b = SpaceRegistryBuilder::new();
        b.register_space(value_space(SPACE_CELSIUS)).unwrap();
        b.register_space(value_space(SPACE_FAHRENHEIT)).unwrap();
        b.register_space(value_space("rgb")).unwrap();
        let (meta, fwd, inv) = celsius_transform_pair();
        b.register_mapping(meta, fwd, Some(inv)).unwrap();
        b
    }

    #[test]
    fn registered_spaces_are_listed_in_order() {
        let reg = builder_with_celsius_chain().freeze();
        let ids: Vec<&str> = reg.spaces().iter().map(|s| s.space_id.as_str()).collect();
        assert_eq!(ids, vec![SPACE_CELSIUS, SPACE_FAHRENHEIT, "rgb"]);
    }

    #[test]
    fn duplicate_space_is_rejected() {
        let mut b = builder_with_celsius_chain();
        let err = b.register_space(value_space(SPACE_CELSIUS)).map(|_| ()).unwrap_err();
        assert_eq!(err, SpacesError::DuplicateSpaceId(SPACE_CELSIUS.into()));
    }

    #[test]
    fn invertible_mapping_resolves_both_directions() {
        let reg = builder_with_celsius_chain().freeze();
        let fwd = reg.resolve_mapping_path(SPACE_CELSIUS, SPACE_FAHRENHEIT).unwrap();
        assert_eq!(fwd.len(), 1);
        assert!(!fwd[0].inverted);
        assert_eq!(fwd[0].mapping_id, CELSIUS_TO_FAHRENHEIT_ID);
        let back = reg.resolve_mapping_path(SPACE_FAHRENHEIT, SPACE_CELSIUS).unwrap();
        assert_eq!(back.len(), 1);
        assert!(back[0].inverted);
    }

    #[test]
    fn identity_path_is_empty() {
        let reg = builder_with_celsius_chain().freeze();
        assert!(reg.resolve_mapping_path(SPACE_CELSIUS, SPACE_CELSIUS).unwrap().is_empty());
    }

    #[test]
    fn unreachable_space_reports_no_path() {
        let reg = builder_with_celsius_chain().freeze();
        let err = reg.resolve_mapping_path(SPACE_CELSIUS, "rgb").unwrap_err();
        assert_eq!(err, SpacesError::NoPath { from: SPACE_CELSIUS.into(), to: "rgb".into() });
    }

    #[test]
    fn mapping_endpoints_must_exist() {
        let mut b = SpaceRegistryBuilder::new();
        b.register_space(value_space(SPACE_CELSIUS)).unwrap();
        let (meta, fwd, _inv) = celsius_transform_pair();
        let err = b.register_mapping(meta, fwd, None).map(|_| ()).unwrap_err();
        assert_eq!(err, SpacesError::UnknownSpace(SPACE_FAHRENHEIT.into()));
    }

    #[test]
    fn view_preferences_must_reference_registered_spaces() {
        let mut b = builder_with_celsius_chain();
        let mut view = SubjectiveView::passthrough("bad");
        view.physical_space_id = Some("nowhere".into());
        let err = b.register_view(view).map(|_| ()).unwrap_err();
        assert_eq!(err, SpacesError::UnknownSpace("nowhere".into()));
    }
}
