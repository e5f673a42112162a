import scrapy

from {{name}}.items import {{project_class}}Item


class {{spider_class}}Spider(scrapy.Spider):
    name = '{{spider_name}}'
    allowed_domains = {{allowed_domains}}
    start_urls = {{start_urls}}

    def parse(self, response):
        item = {{project_class}}Item()
        item['url'] = response.url
        item['title'] = response.css('title::text').get()
        yield item
