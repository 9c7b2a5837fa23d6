"""
Shared plumbing for maxbandit: configuration, errors, response envelopes and the MCP server.
"""
