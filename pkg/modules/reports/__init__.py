# Report generation module
