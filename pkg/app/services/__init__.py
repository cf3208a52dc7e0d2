"""Business logic services."""