#![allow(dead_code)]

pub mod three_agents;
