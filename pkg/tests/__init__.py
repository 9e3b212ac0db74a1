"""Test suite for car-scraper."""
