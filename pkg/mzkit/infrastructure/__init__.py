# Worker pool, extended precision and transport backends
