"""Paquete AppBuild: CLI de MindKit, comandos por etapa y layout de artefactos."""
