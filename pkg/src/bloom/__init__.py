"""Physical-activity coaching engine: plans, garden display, chat agent,
safety filters, notifications, and the service surface that ties them
together."""

__version__ = "0.1.0"
