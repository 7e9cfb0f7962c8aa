"""Tests for the table title generation toolkit"""
