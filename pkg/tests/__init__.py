# Test package for clubforge
