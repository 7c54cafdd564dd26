"""Tests for odap-sim: scenario model, RTT model, event engine, workflow, sweep, analysis and CLI."""
