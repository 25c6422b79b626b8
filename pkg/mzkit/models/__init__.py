# Domain models
