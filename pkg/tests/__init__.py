"""Тесты приложения YOLO Trainer."""
