"""Grid maps, tangent graphs and the K distinct path search."""
