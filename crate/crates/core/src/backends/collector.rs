use crate::engine::Backend;
use crate::error::Result;
use crate::gate::Command;

/// Backend that stores every command it receives.
#[derive(Clone, Debug, Default)]
pub struct CommandCollector {
    commands: Vec<Command>,
    loops: bool,
}

impl CommandCollector {
    /// A collector that keeps `Loop` tags instead of having loops unrolled.
    pub fn with_loop_support() -> Self {
        Self {
            commands: Vec::new(),
            loops: true,
        }
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn into_commands(self) -> Vec<Command> {
        self.commands
    }
}

impl Backend for CommandCollector {
    fn receive(&mut self, cmds: &[Command]) -> Result<()> {
        self.commands.extend_from_slice(cmds);
        Ok(())
    }

    fn supports_loops(&self) -> bool {
        self.loops
    }
}
