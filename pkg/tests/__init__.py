"""Tests for vem-adapt"""
